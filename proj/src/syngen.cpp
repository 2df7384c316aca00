#include "topicatlas/syngen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "topicatlas/error.hpp"

namespace topicatlas {

std::vector<double> sample_dirichlet(std::span<const double> alphas, Rng& rng) {
  if (alphas.empty()) throw ConfigError("Dirichlet needs at least one parameter");
  std::vector<double> logs(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0) || !std::isfinite(alphas[i])) throw ConfigError("Dirichlet parameters must be positive");
    logs[i] = rng.log_gamma_variate(alphas[i]);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  std::vector<double> x(alphas.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::exp(logs[i] - top);
    sum += x[i];
  }
  for (double& v : x) v /= sum;
  return x;
}

namespace {

void check_simplex(std::span<const double> p, const std::string& what) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(what + " has a negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw ConfigError(what + " does not sum to 1");
}

std::vector<double> normalized(std::vector<double> v) {
  double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(s > 0.0)) throw ConfigError("weights sum to zero");
  for (double& x : v) x /= s;
  return v;
}

Document document_from_counts(std::map<WordId, Count>& counts) {
  std::vector<Entry> entries;
  entries.reserve(counts.size());
  for (auto [w, c] : counts) entries.push_back({w, c});
  return Document(std::move(entries));
}

}  // namespace

void LanguageSpec::validate() const {
  if (p_lang.empty()) throw ConfigError("language spec needs at least one language");
  if (freqs.size() != p_lang.size()) throw ConfigError("one frequency vector per language is required");
  if (doc_length < 1 || num_docs < 1) throw ConfigError("L_d and D must be positive");
  check_simplex(p_lang, "p_lang");
  for (const auto& f : freqs) {
    if (f.empty()) throw ConfigError("language with empty vocabulary");
    check_simplex(f, "language frequency vector");
  }
}

LanguageSpec LanguageSpec::uniform(std::vector<double> p_lang, std::size_t n_w, std::size_t doc_length,
                                   std::size_t num_docs) {
  LanguageSpec s;
  s.freqs.assign(p_lang.size(), std::vector<double>(n_w, 1.0 / static_cast<double>(n_w)));
  s.p_lang = std::move(p_lang);
  s.doc_length = doc_length;
  s.num_docs = num_docs;
  return s;
}

LanguageSpec LanguageSpec::egalitarian(std::size_t n_w, std::size_t doc_length, std::size_t num_docs) {
  return uniform(std::vector<double>(10, 0.1), n_w, doc_length, num_docs);
}

LanguageSpec LanguageSpec::oligarchic(std::size_t n_w, std::size_t doc_length, std::size_t num_docs) {
  std::vector<double> p{0.3, 0.3};
  p.resize(10, 0.05);
  return uniform(std::move(p), n_w, doc_length, num_docs);
}

std::size_t DirichletSpec::num_generic() const {
  return static_cast<std::size_t>(std::llround(generic_fraction * static_cast<double>(num_words)));
}

void DirichletSpec::validate() const {
  if (p_topic.empty()) throw ConfigError("Dirichlet spec needs K >= 1");
  if (num_docs < 1 || doc_length < 1 || num_words < 1) throw ConfigError("D, L_d and N_w must be positive");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(generic_fraction >= 0.0 && generic_fraction <= 1.0)) throw ConfigError("generic_fraction must lie in [0,1]");
  check_simplex(p_topic, "p_topic");
  for (double p : p_topic) {
    if (!(p > 0.0)) throw ConfigError("p_topic entries must be positive");
  }
  if (!p_word.empty()) {
    if (p_word.size() != num_words) throw ConfigError("p_word length must equal N_w");
    check_simplex(p_word, "p_word");
  }
}

DirichletSpec DirichletSpec::equal_topics(std::size_t k) {
  DirichletSpec s;
  s.p_topic.assign(k, 1.0 / static_cast<double>(k));
  return s;
}

DirichletSpec DirichletSpec::unequal_topics() {
  DirichletSpec s;
  s.p_topic.assign(4, 0.15);
  s.p_topic.resize(20, 0.025);
  return s;
}

GeneratedCorpus gen_language_corpus(const LanguageSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t k = spec.num_languages();
  std::vector<WordId> offsets(k + 1, 0);
  for (std::size_t l = 0; l < k; ++l) offsets[l + 1] = offsets[l] + static_cast<WordId>(spec.freqs[l].size());
  const std::size_t n_w = offsets[k];

  Rng rng(seed, /*stream=*/0x1a46);
  DiscreteSampler pick_language(spec.p_lang);
  std::vector<DiscreteSampler> pick_word;
  pick_word.reserve(k);
  for (const auto& f : spec.freqs) pick_word.emplace_back(f);

  std::vector<Document> docs;
  docs.reserve(spec.num_docs);
  TopicModel truth(k, spec.num_docs, n_w);
  for (std::size_t d = 0; d < spec.num_docs; ++d) {
    const std::size_t lang = pick_language(rng);
    std::map<WordId, Count> counts;
    for (std::size_t i = 0; i < spec.doc_length; ++i) {
      counts[offsets[lang] + static_cast<WordId>(pick_word[lang](rng))] += 1;
    }
    docs.push_back(document_from_counts(counts));
    truth.theta_row(d)[lang] = 1.0;
  }
  for (std::size_t l = 0; l < k; ++l) {
    auto row = truth.beta_row(l);
    std::copy(spec.freqs[l].begin(), spec.freqs[l].end(), row.begin() + offsets[l]);
  }
  // One-hot documents correspond to the alpha -> 0 limit of alpha_L = kappa p(L).
  for (std::size_t l = 0; l < k; ++l) truth.alpha[l] = std::max(1e-6, 1e-3 * static_cast<double>(k) * spec.p_lang[l]);

  Corpus corpus(std::move(docs), Vocabulary{n_w, {}});
  truth.derive_p_topic(corpus);
  return {std::move(corpus), std::move(truth), {}};
}

GeneratedCorpus gen_dirichlet_corpus(const DirichletSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t k = spec.num_topics();
  const std::size_t n_w = spec.num_words;
  const std::size_t n_generic = spec.num_generic();

  std::vector<double> alpha_topic(k), alpha_generic(k);
  for (std::size_t t = 0; t < k; ++t) {
    alpha_topic[t] = static_cast<double>(k) * spec.p_topic[t] * spec.alpha;
    alpha_generic[t] = static_cast<double>(k) * spec.p_topic[t];
  }
  std::vector<double> p_word = spec.p_word;
  if (p_word.empty()) p_word.assign(n_w, 1.0 / static_cast<double>(n_w));

  Rng doc_rng(seed, /*stream=*/1);
  Rng word_rng(seed, /*stream=*/2);
  Rng token_rng(seed, /*stream=*/3);

  TopicModel truth(k, spec.num_docs, n_w);
  truth.alpha = alpha_topic;

  // Step 1: p(topic|doc).
  for (std::size_t d = 0; d < spec.num_docs; ++d) {
    auto theta = sample_dirichlet(alpha_topic, doc_rng);
    std::copy(theta.begin(), theta.end(), truth.theta_row(d).begin());
  }

  // Step 2: p(topic|word), then Bayes to p(word|topic).
  std::vector<double> topic_mass(k, 0.0);
  for (std::size_t w = 0; w < n_w; ++w) {
    const auto& alphas = w < n_generic ? alpha_generic : alpha_topic;
    auto p_t_given_w = sample_dirichlet(alphas, word_rng);
    for (std::size_t t = 0; t < k; ++t) {
      const double joint = p_t_given_w[t] * p_word[w];
      truth.beta_row(t)[w] = joint;
      topic_mass[t] += joint;
    }
  }
  for (std::size_t t = 0; t < k; ++t) {
    auto row = truth.beta_row(t);
    if (!(topic_mass[t] > 0.0)) {
      // Every word's draw put zero mass on this topic; fall back to p(word).
      std::copy(p_word.begin(), p_word.end(), row.begin());
      continue;
    }
    for (double& v : row) v /= topic_mass[t];
  }

  // Step 3: tokens.
  std::vector<DiscreteSampler> pick_word;
  pick_word.reserve(k);
  for (std::size_t t = 0; t < k; ++t) pick_word.emplace_back(truth.beta_row(t));
  std::vector<Document> docs;
  docs.reserve(spec.num_docs);
  for (std::size_t d = 0; d < spec.num_docs; ++d) {
    DiscreteSampler pick_topic(truth.theta_row(d));
    std::map<WordId, Count> counts;
    for (std::size_t i = 0; i < spec.doc_length; ++i) {
      const std::size_t t = pick_topic(token_rng);
      counts[static_cast<WordId>(pick_word[t](token_rng))] += 1;
    }
    docs.push_back(document_from_counts(counts));
  }

  Corpus corpus(std::move(docs), Vocabulary{n_w, {}});
  truth.derive_p_topic(corpus);
  GeneratedCorpus out{std::move(corpus), std::move(truth), {}};
  out.generic_words.resize(n_generic);
  std::iota(out.generic_words.begin(), out.generic_words.end(), WordId{0});
  return out;
}

// ---------------------------------------------------------------------------
// Spec files

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SpecFile SpecFile::parse(std::istream& in) {
  SpecFile f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", lineno);
    f.values[key] = trim(line.substr(eq + 1));
  }
  return f;
}

SpecFile SpecFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file " + path.string());
  return parse(in);
}

std::string SpecFile::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("spec file is missing key '" + key + "'");
  return it->second;
}

std::string SpecFile::get_or(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double SpecFile::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("spec key '" + key + "' is not a number: " + v);
  }
}

std::size_t SpecFile::get_size(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used != v.size() || x < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("spec key '" + key + "' is not a nonnegative integer: " + v);
  }
}

std::vector<double> SpecFile::get_list(const std::string& key) const {
  std::string v = get(key);
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream ss(v);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("spec key '" + key + "' has a non-numeric entry: " + tok);
    }
  }
  return out;
}

std::vector<double> load_frequency_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open frequency file " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ss >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    try {
      double v = std::stod(toks.back());
      if (!(v >= 0.0)) throw std::invalid_argument(toks.back());
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("bad frequency value in " + path.string(), lineno);
    }
  }
  if (out.empty()) throw ConfigError("frequency file " + path.string() + " is empty");
  return normalized(std::move(out));
}

LanguageSpec language_spec_from(const SpecFile& file, const std::filesystem::path& base_dir) {
  LanguageSpec s;
  s.num_docs = file.get_size("D");
  s.doc_length = file.get_size("L_d");
  if (file.has("p_lang")) {
    s.p_lang = normalized(file.get_list("p_lang"));
  } else {
    const std::size_t k = file.get_size("K");
    if (k == 0) throw ConfigError("K must be positive");
    s.p_lang.assign(k, 1.0 / static_cast<double>(k));
  }
  if (file.has("freq_files")) {
    std::string v = file.get("freq_files");
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream ss(v);
    std::string name;
    while (ss >> name) {
      std::filesystem::path p(name);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      s.freqs.push_back(load_frequency_file(p));
    }
  } else {
    const std::size_t n_w = file.get_size("N_w");
    if (n_w == 0) throw ConfigError("N_w must be positive");
    s.freqs.assign(s.p_lang.size(), std::vector<double>(n_w, 1.0 / static_cast<double>(n_w)));
  }
  s.validate();
  return s;
}

DirichletSpec dirichlet_spec_from(const SpecFile& file) {
  DirichletSpec s;
  s.num_docs = file.get_size("D");
  s.doc_length = file.get_size("L_d");
  s.num_words = file.get_size("N_w");
  s.alpha = file.get_double("alpha");
  if (file.has("generic_fraction")) s.generic_fraction = file.get_double("generic_fraction");
  if (file.has("p_topic")) {
    s.p_topic = normalized(file.get_list("p_topic"));
  } else {
    const std::size_t k = file.get_size("K");
    if (k == 0) throw ConfigError("K must be positive");
    s.p_topic.assign(k, 1.0 / static_cast<double>(k));
  }
  s.validate();
  return s;
}

}  // namespace topicatlas

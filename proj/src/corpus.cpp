#include "topicatlas/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "topicatlas/error.hpp"
#include "topicatlas/rng.hpp"

namespace topicatlas {

Document::Document(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::unordered_set<WordId> seen;
  seen.reserve(entries_.size());
  for (const Entry& e : entries_) {
    if (e.count <= 0) throw DataError("document entry with non-positive count");
    if (!seen.insert(e.word).second) {
      throw DataError("duplicate word index " + std::to_string(e.word) + " in document");
    }
    length_ += e.count;
  }
}

Corpus::Corpus(std::vector<Document> docs, Vocabulary vocab) : docs_(std::move(docs)), vocab_(std::move(vocab)) {
  std::size_t inferred = 0;
  for (const Document& d : docs_) {
    if (d.length() < 1) throw DataError("empty document");
    for (const Entry& e : d.entries()) inferred = std::max<std::size_t>(inferred, std::size_t{e.word} + 1);
  }
  if (vocab_.size == 0) vocab_.size = inferred;
  if (inferred > vocab_.size) {
    throw DataError("word index " + std::to_string(inferred - 1) + " outside vocabulary of size " +
                    std::to_string(vocab_.size));
  }
  if (vocab_.has_labels() && vocab_.labels.size() != vocab_.size) {
    throw DataError("vocabulary label count does not match vocabulary size");
  }
  word_totals_.assign(vocab_.size, 0);
  for (const Document& d : docs_) {
    for (const Entry& e : d.entries()) word_totals_[e.word] += e.count;
    total_length_ += d.length();
    sum_sq_lengths_ += static_cast<double>(d.length()) * static_cast<double>(d.length());
  }
}

Corpus Corpus::subset(const std::vector<std::size_t>& doc_ids) const {
  std::vector<Document> out;
  out.reserve(doc_ids.size());
  for (std::size_t id : doc_ids) out.push_back(docs_.at(id));
  Corpus c;
  c.docs_ = std::move(out);
  c.vocab_ = vocab_;
  c.word_totals_.assign(vocab_.size, 0);
  for (const Document& d : c.docs_) {
    for (const Entry& e : d.entries()) c.word_totals_[e.word] += e.count;
    c.total_length_ += d.length();
    c.sum_sq_lengths_ += static_cast<double>(d.length()) * static_cast<double>(d.length());
  }
  return c;
}

bool Corpus::totals_consistent() const {
  std::vector<Count> totals(vocab_.size, 0);
  Count length = 0;
  for (const Document& d : docs_) {
    Count sum = 0;
    for (const Entry& e : d.entries()) {
      totals[e.word] += e.count;
      sum += e.count;
    }
    if (sum != d.length()) return false;
    length += d.length();
  }
  return totals == word_totals_ && length == total_length_ &&
         std::accumulate(totals.begin(), totals.end(), Count{0}) == total_length_;
}

namespace {

template <typename T>
bool parse_int(std::string_view token, T& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

}  // namespace

Corpus parse_bagofwords(std::istream& in, std::optional<Vocabulary> vocab) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tokens = split_ws(line);
    if (tokens.empty()) throw ParseError("empty line", lineno);
    std::size_t unique = 0;
    if (!parse_int(tokens[0], unique)) throw ParseError("entry count is not an integer", lineno);
    if (unique == 0) throw ParseError("document with no entries", lineno);
    if (tokens.size() - 1 != unique) {
      throw ParseError("expected " + std::to_string(unique) + " entries, found " +
                           std::to_string(tokens.size() - 1),
                       lineno);
    }
    std::vector<Entry> entries;
    entries.reserve(unique);
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      auto colon = tokens[k].find(':');
      if (colon == std::string_view::npos) throw ParseError("entry without ':'", lineno);
      std::int64_t idx = 0, cnt = 0;
      if (!parse_int(tokens[k].substr(0, colon), idx) || idx < 0 || idx > 0xFFFFFFFELL) {
        throw ParseError("bad word index '" + std::string(tokens[k]) + "'", lineno);
      }
      if (!parse_int(tokens[k].substr(colon + 1), cnt)) {
        throw ParseError("bad count '" + std::string(tokens[k]) + "'", lineno);
      }
      if (cnt <= 0) throw ParseError("count must be positive", lineno);
      entries.push_back({static_cast<WordId>(idx), cnt});
    }
    try {
      docs.emplace_back(std::move(entries));
    } catch (const DataError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (docs.empty()) throw DataError("bag-of-words input is empty");
  return Corpus(std::move(docs), vocab.value_or(Vocabulary{}));
}

Corpus load_bagofwords(const std::filesystem::path& path, const std::optional<std::filesystem::path>& vocab_path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  std::optional<Vocabulary> vocab;
  if (vocab_path) vocab = load_vocabulary(*vocab_path);
  try {
    return parse_bagofwords(in, std::move(vocab));
  } catch (const ParseError& e) {
    throw ParseError(e.detail() + " in " + path.string(), e.line());
  }
}

void write_bagofwords(const Corpus& corpus, std::ostream& out) {
  for (const Document& d : corpus.docs()) {
    out << d.unique_words();
    for (const Entry& e : d.entries()) out << ' ' << e.word << ':' << e.count;
    out << '\n';
  }
}

void save_bagofwords(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  write_bagofwords(corpus, out);
  if (!out) throw DataError("write failed for " + path.string());
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file " + path.string());
  Vocabulary v;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!seen.insert(line).second) throw ParseError("duplicate label '" + line + "'", lineno);
    v.labels.push_back(line);
  }
  v.size = v.labels.size();
  return v;
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary file " + path.string());
  for (const auto& label : vocab.labels) out << label << '\n';
}

HoldoutSplit split_holdout(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("holdout fraction must lie in [0, 1)");
  const std::size_t n = corpus.num_docs();
  if (n == 0) throw DataError("cannot split an empty corpus");
  const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_test >= n) throw ConfigError("holdout fraction leaves no training documents");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, /*stream=*/0x401d);
  rng.shuffle(order);

  HoldoutSplit split;
  split.test_ids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  std::sort(split.train_ids.begin(), split.train_ids.end());
  split.train = corpus.subset(split.train_ids);
  split.test = corpus.subset(split.test_ids);
  return split;
}

}  // namespace topicatlas

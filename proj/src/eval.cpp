#include "topicatlas/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "topicatlas/error.hpp"
#include "topicatlas/rng.hpp"

namespace topicatlas {

namespace {

std::vector<double> normalized_weights(std::span<const double> w) {
  std::vector<double> out(w.begin(), w.end());
  const double s = std::accumulate(out.begin(), out.end(), 0.0);
  if (!(s > 0.0)) throw DataError("topic weights sum to zero");
  for (double& v : out) v /= s;
  return out;
}

// Row-normalized copy with items permuted: out[t][perm[i]] = in[t][i].
TopicProfiles permuted(const TopicProfiles& p, const std::vector<std::size_t>& perm) {
  TopicProfiles out = p;
  for (std::size_t t = 0; t < p.num_topics; ++t) {
    const double* src = p.rows.data() + t * p.num_items;
    double* dst = out.rows.data() + t * p.num_items;
    for (std::size_t i = 0; i < p.num_items; ++i) dst[perm[i]] = src[i];
  }
  return out;
}

// K_p x K_q similarity matrix.
std::vector<double> similarity_matrix(const TopicProfiles& p, const TopicProfiles& q) {
  if (p.num_items != q.num_items) throw DataError("models are defined over different item sets");
  std::vector<double> s(p.num_topics * q.num_topics);
  for (std::size_t a = 0; a < p.num_topics; ++a) {
    for (std::size_t b = 0; b < q.num_topics; ++b) s[a * q.num_topics + b] = topic_similarity(p, a, q, b);
  }
  return s;
}

double forward_from(const std::vector<double>& s, const TopicProfiles& p, const TopicProfiles& q) {
  double f = 0.0;
  for (std::size_t a = 0; a < p.num_topics; ++a) {
    const auto* row = s.data() + a * q.num_topics;
    f += p.weights[a] * *std::max_element(row, row + q.num_topics);
  }
  return f;
}

double backward_from(const std::vector<double>& s, const TopicProfiles& p, const TopicProfiles& q) {
  double b = 0.0;
  for (std::size_t c = 0; c < q.num_topics; ++c) {
    double best = 0.0;
    for (std::size_t a = 0; a < p.num_topics; ++a) best = std::max(best, s[a * q.num_topics + c]);
    b += q.weights[c] * best;
  }
  return b;
}

}  // namespace

TopicProfiles doc_profiles(const TopicModel& model, const Corpus& corpus) {
  if (model.num_docs != corpus.num_docs()) throw DataError("model and corpus disagree on document count");
  TopicProfiles p;
  p.num_topics = model.num_topics;
  p.num_items = model.num_docs;
  p.rows.assign(p.num_topics * p.num_items, 0.0);
  p.weights = normalized_weights(model.p_topic);
  const double l_c = static_cast<double>(corpus.total_length());
  std::vector<double> total(p.num_topics, 0.0);
  for (std::size_t d = 0; d < model.num_docs; ++d) {
    const double p_d = static_cast<double>(corpus.doc(d).length()) / l_c;
    auto theta = model.theta_row(d);
    for (std::size_t t = 0; t < p.num_topics; ++t) {
      const double joint = theta[t] * p_d;
      p.rows[t * p.num_items + d] = joint;
      total[t] += joint;
    }
  }
  for (std::size_t t = 0; t < p.num_topics; ++t) {
    if (!(total[t] > 0.0)) continue;  // unused topic: all-zero row
    for (std::size_t d = 0; d < p.num_items; ++d) p.rows[t * p.num_items + d] /= total[t];
  }
  return p;
}

TopicProfiles word_profiles(const TopicModel& model) {
  TopicProfiles p;
  p.num_topics = model.num_topics;
  p.num_items = model.num_words;
  p.rows = model.beta;
  p.weights = normalized_weights(model.p_topic);
  return p;
}

double topic_similarity(const TopicProfiles& p, std::size_t t1, const TopicProfiles& q, std::size_t t2) {
  if (p.num_items != q.num_items) throw DataError("models are defined over different item sets");
  auto a = p.row(t1);
  auto b = q.row(t2);
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(a[i] - b[i]);
  return std::clamp(1.0 - 0.5 * l1, 0.0, 1.0);
}

double topic_similarity(const TopicModel& pm, const TopicModel& qm, const Corpus& corpus, std::size_t t1,
                        std::size_t t2) {
  return topic_similarity(doc_profiles(pm, corpus), t1, doc_profiles(qm, corpus), t2);
}

BestMatch best_match(const TopicProfiles& p, const TopicProfiles& q) {
  const auto s = similarity_matrix(p, q);
  BestMatch m;
  m.forward = forward_from(s, p, q);
  m.backward = backward_from(s, p, q);
  m.bm = 0.5 * (m.forward + m.backward);
  return m;
}

BestMatch best_match(const TopicModel& pm, const TopicModel& qm, const Corpus& corpus) {
  return best_match(doc_profiles(pm, corpus), doc_profiles(qm, corpus));
}

NormalizedMatch bm_normalized(const TopicProfiles& p, const TopicProfiles& q, std::size_t shuffles,
                              std::uint64_t seed) {
  if (shuffles < 1) throw ConfigError("at least one shuffle is needed");
  NormalizedMatch r;
  r.match = best_match(p, q);
  Rng rng(seed, /*stream=*/0xb3);
  std::vector<std::size_t> perm(p.num_items);
  double sum = 0.0;
  for (std::size_t s = 0; s < shuffles; ++s) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    const TopicProfiles qs = permuted(q, perm);
    const double fwd = forward_from(similarity_matrix(p, qs), p, qs);
    rng.shuffle(perm);
    const TopicProfiles ps = permuted(p, perm);
    const double bwd = backward_from(similarity_matrix(ps, q), ps, q);
    sum += 0.5 * (fwd + bwd);
  }
  r.bm_rand = sum / static_cast<double>(shuffles);
  if (r.bm_rand >= 1.0 - 1e-12) {
    r.degenerate = true;
    r.bm_n = r.match.bm >= 1.0 - 1e-12 ? 1.0 : 0.0;
  } else {
    r.bm_n = (r.match.bm - r.bm_rand) / (1.0 - r.bm_rand);
  }
  return r;
}

NormalizedMatch bm_normalized(const TopicModel& pm, const TopicModel& qm, const Corpus& corpus, std::size_t shuffles,
                              std::uint64_t seed) {
  return bm_normalized(doc_profiles(pm, corpus), doc_profiles(qm, corpus), shuffles, seed);
}

NormalizedMatch bm_normalized_words(const TopicModel& pm, const TopicModel& qm, std::size_t shuffles,
                                    std::uint64_t seed) {
  return bm_normalized(word_profiles(pm), word_profiles(qm), shuffles, seed);
}

double effective_topics(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return std::exp2(h);
}

double perplexity(const TopicModel& model, const Corpus& docs, std::span<const double> theta) {
  const std::size_t k = model.num_topics;
  if (theta.size() != docs.num_docs() * k) throw DataError("theta table does not match the documents");
  if (model.num_words != docs.vocab_size()) throw DataError("documents use a different vocabulary");
  double ll = 0.0, length = 0.0;
  for (std::size_t d = 0; d < docs.num_docs(); ++d) {
    for (const Entry& e : docs.doc(d).entries()) {
      double q = 0.0;
      for (std::size_t t = 0; t < k; ++t) q += theta[d * k + t] * model.beta_row(t)[e.word];
      if (!(q > 0.0)) throw NumericalError("held-out word " + std::to_string(e.word) + " has zero probability");
      ll += static_cast<double>(e.count) * std::log(q);
    }
    length += static_cast<double>(docs.doc(d).length());
  }
  return std::exp(-ll / length);
}

double perplexity(const TopicModel& model, const Corpus& heldout, std::size_t threads) {
  const auto theta = fold_in(model, heldout, 50, 1e-6, threads);
  return perplexity(model, heldout, theta);
}

Engine parse_engine(const std::string& s) {
  if (s == "topicmap") return Engine::TopicMap;
  if (s == "lda") return Engine::Lda;
  if (s == "plsa") return Engine::Plsa;
  throw ConfigError("unknown engine '" + s + "' (topicmap, lda, plsa)");
}

std::string to_string(Engine e) {
  switch (e) {
    case Engine::TopicMap:
      return "topicmap";
    case Engine::Lda:
      return "lda";
    case Engine::Plsa:
      return "plsa";
  }
  return "?";
}

std::vector<ScanPoint> heldout_scan(const Corpus& corpus, const std::vector<std::size_t>& k_list, Engine engine,
                                    const ScanOptions& opts) {
  if (k_list.empty()) throw ConfigError("heldout_scan needs at least one K");
  if (engine == Engine::TopicMap) throw ConfigError("heldout_scan fits a fixed K; use lda or plsa");
  const HoldoutSplit split = split_holdout(corpus, opts.holdout_fraction, opts.seed);
  std::vector<ScanPoint> out;
  for (std::size_t k : k_list) {
    ScanPoint pt;
    pt.k = k;
    try {
      const FitResult fit =
          engine == Engine::Lda ? lda_fit(split.train, k, opts.fit) : plsa_fit(split.train, k, opts.fit);
      pt.perplexity = perplexity(fit.model, split.test, opts.fit.threads);
      pt.heldout_loglik = -std::log(pt.perplexity);
      pt.effective_topics = effective_topics(fit.model.p_topic);
    } catch (const Error& e) {
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

}  // namespace

void EvalReport::write(std::ostream& out) const {
  out << "num_topics=" << num_topics << '\n';
  out << "effective_topics=" << fmt(effective_topics) << '\n';
  if (doc_match) {
    out << "bm_forward=" << fmt(doc_match->match.forward) << '\n';
    out << "bm_backward=" << fmt(doc_match->match.backward) << '\n';
    out << "bm=" << fmt(doc_match->match.bm) << '\n';
    out << "bm_rand=" << fmt(doc_match->bm_rand) << '\n';
    out << "bm_n=" << fmt(doc_match->bm_n) << '\n';
    out << "bm_degenerate=" << (doc_match->degenerate ? 1 : 0) << '\n';
  }
  if (word_match) out << "word_bm_n=" << fmt(word_match->bm_n) << '\n';
  if (perplexity) out << "perplexity=" << fmt(*perplexity) << '\n';
  if (heldout_loglik) out << "heldout_loglik=" << fmt(*heldout_loglik) << '\n';
  out << "seconds=" << fmt(seconds) << '\n';
}

std::string EvalReport::csv_header() {
  return "num_topics,effective_topics,bm_forward,bm_backward,bm,bm_rand,bm_n,word_bm_n,perplexity,heldout_loglik,"
         "seconds";
}

std::string EvalReport::csv_row() const {
  std::ostringstream s;
  auto opt = [&](const std::optional<double>& v) {
    if (v) s << fmt(*v);
  };
  s << num_topics << ',' << fmt(effective_topics) << ',';
  if (doc_match) {
    s << fmt(doc_match->match.forward) << ',' << fmt(doc_match->match.backward) << ',' << fmt(doc_match->match.bm)
      << ',' << fmt(doc_match->bm_rand) << ',' << fmt(doc_match->bm_n) << ',';
  } else {
    s << ",,,,,";
  }
  opt(word_match ? std::optional<double>(word_match->bm_n) : std::nullopt);
  s << ',';
  opt(perplexity);
  s << ',';
  opt(heldout_loglik);
  s << ',' << fmt(seconds);
  return s.str();
}

}  // namespace topicatlas

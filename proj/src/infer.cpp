#include "topicatlas/infer.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "topicatlas/error.hpp"
#include "topicatlas/parallel.hpp"
#include "topicatlas/rng.hpp"

namespace topicatlas {

InitMode parse_init_mode(const std::string& s) {
  if (s == "random") return InitMode::Random;
  if (s == "seeded") return InitMode::Seeded;
  if (s == "model" || s == "from-model") return InitMode::FromModel;
  throw ConfigError("unknown init mode '" + s + "' (random, seeded, model)");
}

std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::Random:
      return "random";
    case InitMode::Seeded:
      return "seeded";
    case InitMode::FromModel:
      return "model";
  }
  return "?";
}

void FitOptions::validate() const {
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (var_max_iters < 1) throw ConfigError("var_max_iters must be at least 1");
  if (!(var_tolerance > 0.0)) throw ConfigError("var_tolerance must be positive");
  if (!(initial_alpha > 0.0)) throw ConfigError("initial alpha must be positive");
  if (init == InitMode::FromModel && !init_model) throw ConfigError("init=model needs an initial model");
}

namespace {

constexpr double kBetaSmoothing = 1e-9;
constexpr double kThetaFloor = 1e-10;
constexpr double kAlphaMin = 1e-6;
constexpr double kAlphaMax = 1e3;
// Documents per E-step block; sufficient statistics of a block are reduced
// in document order.
constexpr std::size_t kBlock = 512;

double digamma(double x) { return boost::math::digamma(x); }
double trigamma(double x) { return boost::math::trigamma(x); }

// log p(word|topic) stored word-major (N_w x K) so a document's rows are
// contiguous.
struct LogTopics {
  std::size_t k = 0;
  std::size_t n_w = 0;
  std::vector<double> log_beta;

  const double* row(WordId w) const { return log_beta.data() + static_cast<std::size_t>(w) * k; }
};

// Normalizes word-major topic-word masses per topic and applies the
// smoothing (beta + eps/N_w) / (1 + eps).
LogTopics topics_from_counts(const std::vector<double>& counts, std::size_t k, std::size_t n_w) {
  std::vector<double> total(k, 0.0);
  for (std::size_t w = 0; w < n_w; ++w) {
    for (std::size_t t = 0; t < k; ++t) total[t] += counts[w * k + t];
  }
  LogTopics out{k, n_w, std::vector<double>(n_w * k)};
  const double floor = kBetaSmoothing / static_cast<double>(n_w);
  for (std::size_t w = 0; w < n_w; ++w) {
    for (std::size_t t = 0; t < k; ++t) {
      const double beta = total[t] > 0.0 ? counts[w * k + t] / total[t] : 1.0 / static_cast<double>(n_w);
      out.log_beta[w * k + t] = std::log((beta + floor) / (1.0 + kBetaSmoothing));
    }
  }
  return out;
}

LogTopics topics_from_model(const TopicModel& m) {
  std::vector<double> counts(m.num_words * m.num_topics);
  for (std::size_t t = 0; t < m.num_topics; ++t) {
    auto row = m.beta_row(t);
    for (std::size_t w = 0; w < m.num_words; ++w) counts[w * m.num_topics + t] = row[w];
  }
  return topics_from_counts(counts, m.num_topics, m.num_words);
}

double alpha_constant(std::span<const double> alpha) {
  double sum = 0.0, lg = 0.0;
  for (double a : alpha) {
    sum += a;
    lg += std::lgamma(a);
  }
  return std::lgamma(sum) - lg;
}

// Coordinate ascent on one document's variational parameters, starting
// from `gamma`. Leaves the final responsibilities in `phi` (u x K) and
// returns the document's bound.
double infer_doc(const Document& doc, const LogTopics& topics, std::span<const double> alpha, double alpha_const,
                 std::span<double> gamma, std::vector<double>& phi, std::size_t max_iters, double tol) {
  const std::size_t k = topics.k;
  const auto& entries = doc.entries();
  phi.resize(entries.size() * k);
  std::vector<double> dig(k), e_log_theta(k);
  for (std::size_t t = 0; t < k; ++t) dig[t] = digamma(gamma[t]);
  double bound = 0.0, previous = 0.0;
  for (std::size_t iter = 1; iter <= max_iters; ++iter) {
    for (std::size_t n = 0; n < entries.size(); ++n) {
      const double* lb = topics.row(entries[n].word);
      double* row = phi.data() + n * k;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < k; ++t) {
        row[t] = lb[t] + dig[t];
        mx = std::max(mx, row[t]);
      }
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        row[t] = std::exp(row[t] - mx);
        s += row[t];
      }
      for (std::size_t t = 0; t < k; ++t) row[t] /= s;
    }
    std::copy(alpha.begin(), alpha.end(), gamma.begin());
    for (std::size_t n = 0; n < entries.size(); ++n) {
      const double c = static_cast<double>(entries[n].count);
      const double* row = phi.data() + n * k;
      for (std::size_t t = 0; t < k; ++t) gamma[t] += c * row[t];
    }

    double sum_gamma = 0.0;
    for (std::size_t t = 0; t < k; ++t) sum_gamma += gamma[t];
    const double dsum = digamma(sum_gamma);
    bound = alpha_const - std::lgamma(sum_gamma);
    for (std::size_t t = 0; t < k; ++t) {
      dig[t] = digamma(gamma[t]);
      e_log_theta[t] = dig[t] - dsum;
      bound += (alpha[t] - gamma[t]) * e_log_theta[t] + std::lgamma(gamma[t]);
    }
    for (std::size_t n = 0; n < entries.size(); ++n) {
      const double c = static_cast<double>(entries[n].count);
      const double* lb = topics.row(entries[n].word);
      const double* row = phi.data() + n * k;
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        if (row[t] > 0.0) s += row[t] * (e_log_theta[t] + lb[t] - std::log(row[t]));
      }
      bound += c * s;
    }
    if (iter > 1 && std::abs((previous - bound) / previous) < tol) break;
    previous = bound;
  }
  return bound;
}

double alpha_objective(std::span<const double> alpha, std::span<const double> ss, double num_docs) {
  double obj = num_docs * alpha_constant(alpha);
  for (std::size_t t = 0; t < alpha.size(); ++t) obj += (alpha[t] - 1.0) * ss[t];
  return obj;
}

// Symmetric alpha: the objective is concave in a, so bisection on the sign
// of its derivative over [kAlphaMin, kAlphaMax] finds the maximizer.
void update_scalar_alpha(std::vector<double>& alpha, std::span<const double> ss, double num_docs) {
  const double k = static_cast<double>(alpha.size());
  if (alpha.size() < 2) return;
  const double s = std::accumulate(ss.begin(), ss.end(), 0.0);
  auto slope = [&](double a) { return num_docs * k * (digamma(k * a) - digamma(a)) + s; };
  double a;
  if (slope(kAlphaMin) <= 0.0) {
    a = kAlphaMin;
  } else if (slope(kAlphaMax) >= 0.0) {
    a = kAlphaMax;
  } else {
    double lo = std::log(kAlphaMin), hi = std::log(kAlphaMax);
    for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
      const double mid = 0.5 * (lo + hi);
      (slope(std::exp(mid)) > 0.0 ? lo : hi) = mid;
    }
    a = std::exp(0.5 * (lo + hi));
  }
  std::fill(alpha.begin(), alpha.end(), a);
}

// Per-topic alpha by Newton's method with the diagonal-plus-rank-one
// Hessian solved in closed form; steps are halved until they stay inside
// the box and improve the objective.
void update_asymmetric_alpha(std::vector<double>& alpha, std::span<const double> ss, double num_docs) {
  const std::size_t k = alpha.size();
  std::vector<double> g(k), q(k), next(k);
  double obj = alpha_objective(alpha, ss, num_docs);
  for (int iter = 0; iter < 100; ++iter) {
    const double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    const double ds = digamma(sum);
    const double z = num_docs * trigamma(sum);
    double sum_gq = 0.0, sum_inv_q = 0.0, max_g = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      g[t] = num_docs * (ds - digamma(alpha[t])) + ss[t];
      q[t] = -num_docs * trigamma(alpha[t]);
      sum_gq += g[t] / q[t];
      sum_inv_q += 1.0 / q[t];
      max_g = std::max(max_g, std::abs(g[t]));
    }
    if (max_g < 1e-10 * num_docs) break;
    const double b = sum_gq / (1.0 / z + sum_inv_q);
    double lambda = 1.0;
    double gain = 0.0;
    for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
      bool inside = true;
      for (std::size_t t = 0; t < k; ++t) {
        next[t] = alpha[t] - lambda * (g[t] - b) / q[t];
        if (!(next[t] >= kAlphaMin && next[t] <= kAlphaMax)) inside = false;
      }
      if (!inside) continue;
      const double next_obj = alpha_objective(next, ss, num_docs);
      if (next_obj > obj) {
        gain = next_obj - obj;
        alpha = next;
        obj = next_obj;
        break;
      }
    }
    if (gain <= 1e-12 * std::abs(obj)) break;
  }
}

TopicModel build_model(const Corpus& corpus, const LogTopics& topics, const std::vector<double>& gamma,
                       const std::vector<double>& alpha) {
  const std::size_t k = topics.k, n_w = topics.n_w;
  TopicModel m(k, corpus.num_docs(), n_w);
  m.alpha = alpha;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const double* g = gamma.data() + d * k;
    const double s = std::accumulate(g, g + k, 0.0);
    auto row = m.theta_row(d);
    for (std::size_t t = 0; t < k; ++t) row[t] = g[t] / s;
  }
  for (std::size_t t = 0; t < k; ++t) {
    auto row = m.beta_row(t);
    for (std::size_t w = 0; w < n_w; ++w) row[w] = std::exp(topics.log_beta[w * k + t]);
  }
  m.derive_p_topic(corpus);
  return m;
}

std::vector<double> random_topic_counts(std::size_t k, std::size_t n_w, std::uint64_t seed) {
  Rng rng(seed, /*stream=*/0x1da);
  std::vector<double> counts(n_w * k);
  const double base = 1.0 / static_cast<double>(n_w);
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t w = 0; w < n_w; ++w) counts[w * k + t] = base + rng.uniform();
  }
  return counts;
}

std::vector<double> floored_theta(std::span<const double> row) {
  std::vector<double> out(row.begin(), row.end());
  double s = 0.0;
  for (double& v : out) {
    v = std::max(v, kThetaFloor);
    s += v;
  }
  for (double& v : out) v /= s;
  return out;
}

void check_init_model(const TopicModel& m, const Corpus& corpus, std::size_t k) {
  if (m.num_topics != k || m.num_docs != corpus.num_docs() || m.num_words != corpus.vocab_size()) {
    throw ConfigError("initial model shape does not match the corpus and K");
  }
}

}  // namespace

TopicModel seeded_init(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("K must be at least 1");
  if (k > corpus.num_docs()) throw ConfigError("seeded init needs K <= number of documents");
  Rng rng(seed, /*stream=*/0x5eed);
  std::vector<std::size_t> ids(corpus.num_docs());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(ids[i], ids[i + rng.uniform_int(ids.size() - i)]);
  const std::size_t n_w = corpus.vocab_size();
  TopicModel m(k, corpus.num_docs(), n_w);
  for (std::size_t t = 0; t < k; ++t) {
    const Document& doc = corpus.doc(ids[t]);
    auto row = m.beta_row(t);
    const double total = static_cast<double>(doc.length()) + static_cast<double>(n_w);
    std::fill(row.begin(), row.end(), 1.0 / total);
    for (const Entry& e : doc.entries()) row[e.word] = (static_cast<double>(e.count) + 1.0) / total;
  }
  std::fill(m.theta.begin(), m.theta.end(), 1.0 / static_cast<double>(k));
  m.derive_p_topic(corpus);
  return m;
}

FitResult lda_fit(const Corpus& corpus, std::size_t k, const FitOptions& opts) {
  opts.validate();
  if (k < 1) throw ConfigError("K must be at least 1");
  if (corpus.num_docs() == 0) throw DataError("cannot fit an empty corpus");
  const std::size_t n_docs = corpus.num_docs(), n_w = corpus.vocab_size();
  FitResult result;

  LogTopics topics;
  std::vector<double> alpha(k, opts.initial_alpha);
  std::vector<double> gamma(n_docs * k);
  switch (opts.init) {
    case InitMode::Random:
      if (k > n_w) result.warnings.push_back("K exceeds the vocabulary size");
      topics = topics_from_counts(random_topic_counts(k, n_w, opts.seed), k, n_w);
      break;
    case InitMode::Seeded:
      topics = topics_from_model(seeded_init(corpus, k, opts.seed));
      break;
    case InitMode::FromModel:
      check_init_model(*opts.init_model, corpus, k);
      topics = topics_from_model(*opts.init_model);
      alpha = opts.init_model->alpha;
      break;
  }
  for (std::size_t d = 0; d < n_docs; ++d) {
    const double l_d = static_cast<double>(corpus.doc(d).length());
    if (opts.init == InitMode::FromModel) {
      const auto theta = floored_theta(opts.init_model->theta_row(d));
      for (std::size_t t = 0; t < k; ++t) gamma[d * k + t] = alpha[t] + l_d * theta[t];
    } else {
      for (std::size_t t = 0; t < k; ++t) gamma[d * k + t] = alpha[t] + l_d / static_cast<double>(k);
    }
  }

  std::vector<double> counts(n_w * k);
  std::vector<double> ss_alpha(k);
  std::vector<std::vector<double>> phi(std::min(kBlock, n_docs));
  std::vector<double> doc_bound(std::min(kBlock, n_docs));
  double previous = 0.0;
  for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
    std::fill(counts.begin(), counts.end(), 0.0);
    std::fill(ss_alpha.begin(), ss_alpha.end(), 0.0);
    const double a_const = alpha_constant(alpha);
    double bound = 0.0;
    for (std::size_t start = 0; start < n_docs; start += kBlock) {
      const std::size_t nb = std::min(kBlock, n_docs - start);
      parallel_for(nb, opts.threads, [&](std::size_t i) {
        const std::size_t d = start + i;
        doc_bound[i] = infer_doc(corpus.doc(d), topics, alpha, a_const, {gamma.data() + d * k, k}, phi[i],
                                 opts.var_max_iters, opts.var_tolerance);
      });
      for (std::size_t i = 0; i < nb; ++i) {
        const std::size_t d = start + i;
        const auto& entries = corpus.doc(d).entries();
        for (std::size_t n = 0; n < entries.size(); ++n) {
          const double c = static_cast<double>(entries[n].count);
          const double* row = phi[i].data() + n * k;
          double* dst = counts.data() + static_cast<std::size_t>(entries[n].word) * k;
          for (std::size_t t = 0; t < k; ++t) dst[t] += c * row[t];
        }
        const double* g = gamma.data() + d * k;
        const double dsum = digamma(std::accumulate(g, g + k, 0.0));
        for (std::size_t t = 0; t < k; ++t) ss_alpha[t] += digamma(g[t]) - dsum;
        bound += doc_bound[i];
      }
    }
    if (!std::isfinite(bound)) throw NumericalError("LDA bound is not finite at iteration " + std::to_string(iter));
    result.trace.push_back(bound);

    topics = topics_from_counts(counts, k, n_w);
    if (opts.alpha_mode == AlphaMode::OptimizedScalar) {
      update_scalar_alpha(alpha, ss_alpha, static_cast<double>(n_docs));
    } else if (opts.alpha_mode == AlphaMode::Asymmetric) {
      update_asymmetric_alpha(alpha, ss_alpha, static_cast<double>(n_docs));
    }
    result.iterations = iter;
    if (opts.checkpoint_every > 0 && (iter == 1 || iter % opts.checkpoint_every == 0)) {
      result.checkpoints.emplace_back(iter, build_model(corpus, topics, gamma, alpha));
    }
    if (iter > 1 && !opts.fixed_iterations && std::abs((bound - previous) / previous) < opts.tolerance) {
      result.converged = true;
      break;
    }
    previous = bound;
  }
  result.model = build_model(corpus, topics, gamma, alpha);
  return result;
}

FitResult refine_with_lda(const GuessState& guess, const Corpus& corpus, FitOptions opts) {
  opts.init = InitMode::FromModel;
  opts.init_model = guess.to_model(0.01);
  opts.alpha_mode = AlphaMode::Asymmetric;
  if (opts.checkpoint_every == 0) opts.checkpoint_every = 5;
  FitResult r = lda_fit(corpus, guess.num_topics(), opts);
  if (r.checkpoints.empty() || r.checkpoints.back().first != r.iterations) {
    r.checkpoints.emplace_back(r.iterations, r.model);
  }
  return r;
}

FitResult plsa_fit(const Corpus& corpus, std::size_t k, const FitOptions& opts) {
  opts.validate();
  if (k < 1) throw ConfigError("K must be at least 1");
  if (corpus.num_docs() == 0) throw DataError("cannot fit an empty corpus");
  const std::size_t n_docs = corpus.num_docs(), n_w = corpus.vocab_size();
  FitResult result;

  LogTopics topics;
  std::vector<double> theta(n_docs * k, 1.0 / static_cast<double>(k));
  switch (opts.init) {
    case InitMode::Random:
      if (k > n_w) result.warnings.push_back("K exceeds the vocabulary size");
      topics = topics_from_counts(random_topic_counts(k, n_w, opts.seed), k, n_w);
      break;
    case InitMode::Seeded:
      topics = topics_from_model(seeded_init(corpus, k, opts.seed));
      break;
    case InitMode::FromModel:
      check_init_model(*opts.init_model, corpus, k);
      topics = topics_from_model(*opts.init_model);
      for (std::size_t d = 0; d < n_docs; ++d) {
        const auto row = floored_theta(opts.init_model->theta_row(d));
        std::copy(row.begin(), row.end(), theta.begin() + static_cast<std::ptrdiff_t>(d * k));
      }
      break;
  }
  std::vector<double> beta(n_w * k);
  auto refresh_beta = [&] {
    for (std::size_t i = 0; i < beta.size(); ++i) beta[i] = std::exp(topics.log_beta[i]);
  };
  refresh_beta();

  const double l_c = static_cast<double>(corpus.total_length());
  double doc_term = 0.0;
  for (const Document& d : corpus.docs()) {
    const double l_d = static_cast<double>(d.length());
    doc_term += l_d * std::log(l_d / l_c);
  }

  std::vector<double> counts(n_w * k);
  std::vector<double> next_theta(n_docs * k);
  std::vector<std::vector<double>> resp(std::min(kBlock, n_docs));
  std::vector<double> doc_ll(std::min(kBlock, n_docs));
  double previous = 0.0;
  for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
    std::fill(counts.begin(), counts.end(), 0.0);
    double ll = doc_term;
    for (std::size_t start = 0; start < n_docs; start += kBlock) {
      const std::size_t nb = std::min(kBlock, n_docs - start);
      parallel_for(nb, opts.threads, [&](std::size_t i) {
        const std::size_t d = start + i;
        const auto& entries = corpus.doc(d).entries();
        const double* th = theta.data() + d * k;
        double* nt = next_theta.data() + d * k;
        std::fill(nt, nt + k, 0.0);
        auto& r = resp[i];
        r.resize(entries.size() * k);
        double s_ll = 0.0;
        for (std::size_t n = 0; n < entries.size(); ++n) {
          const double c = static_cast<double>(entries[n].count);
          const double* b = beta.data() + static_cast<std::size_t>(entries[n].word) * k;
          double* row = r.data() + n * k;
          double p = 0.0;
          for (std::size_t t = 0; t < k; ++t) {
            row[t] = b[t] * th[t];
            p += row[t];
          }
          s_ll += c * std::log(p);
          for (std::size_t t = 0; t < k; ++t) {
            row[t] *= c / p;
            nt[t] += row[t];
          }
        }
        const double l_d = static_cast<double>(corpus.doc(d).length());
        for (std::size_t t = 0; t < k; ++t) nt[t] /= l_d;
        doc_ll[i] = s_ll;
      });
      for (std::size_t i = 0; i < nb; ++i) {
        const auto& entries = corpus.doc(start + i).entries();
        for (std::size_t n = 0; n < entries.size(); ++n) {
          const double* row = resp[i].data() + n * k;
          double* dst = counts.data() + static_cast<std::size_t>(entries[n].word) * k;
          for (std::size_t t = 0; t < k; ++t) dst[t] += row[t];
        }
        ll += doc_ll[i];
      }
    }
    if (!std::isfinite(ll)) throw NumericalError("PLSA log-likelihood is not finite at iteration " + std::to_string(iter));
    result.trace.push_back(ll);
    theta.swap(next_theta);
    topics = topics_from_counts(counts, k, n_w);
    refresh_beta();
    result.iterations = iter;
    if (iter > 1 && !opts.fixed_iterations && std::abs((ll - previous) / previous) < opts.tolerance) {
      result.converged = true;
      break;
    }
    previous = ll;
  }

  TopicModel m(k, n_docs, n_w);
  m.theta = theta;
  for (std::size_t t = 0; t < k; ++t) {
    auto row = m.beta_row(t);
    for (std::size_t w = 0; w < n_w; ++w) row[w] = beta[w * k + t];
  }
  m.derive_p_topic(corpus);
  result.model = std::move(m);
  return result;
}

std::vector<double> fold_in(const TopicModel& model, const Corpus& docs, std::size_t var_max_iters, double var_tolerance,
                            std::size_t threads) {
  if (model.num_words != docs.vocab_size()) throw DataError("held-out documents use a different vocabulary");
  const std::size_t k = model.num_topics;
  const LogTopics topics = topics_from_model(model);
  const double a_const = alpha_constant(model.alpha);
  std::vector<double> theta(docs.num_docs() * k);
  parallel_for(docs.num_docs(), threads, [&](std::size_t d) {
    std::vector<double> gamma(k), phi;
    const double l_d = static_cast<double>(docs.doc(d).length());
    for (std::size_t t = 0; t < k; ++t) gamma[t] = model.alpha[t] + l_d / static_cast<double>(k);
    infer_doc(docs.doc(d), topics, model.alpha, a_const, gamma, phi, var_max_iters, var_tolerance);
    const double s = std::accumulate(gamma.begin(), gamma.end(), 0.0);
    for (std::size_t t = 0; t < k; ++t) theta[d * k + t] = gamma[t] / s;
  });
  return theta;
}

}  // namespace topicatlas

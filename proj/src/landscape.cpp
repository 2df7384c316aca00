#include "topicatlas/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "topicatlas/error.hpp"
#include "topicatlas/parallel.hpp"
#include "topicatlas/syngen.hpp"

namespace topicatlas {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kExhaustiveLimit = 1e7;

double binary_entropy(double p) {
  p = std::clamp(p, 0.0, 1.0);
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

// Binomial(n, p) pmf together with tail sums. below[T] and below_n[T] sum
// p(k) and k p(k) over k < T, accumulated upward; above[T] and above_n[T]
// over k >= T, accumulated downward, so neither side is formed by
// subtracting from 1.
struct SplitTable {
  std::size_t n = 0;
  double p = 0.0;
  std::vector<double> below, below_n, above, above_n;

  SplitTable(std::size_t trials, double prob) : n(trials), p(prob) {
    std::vector<double> pmf(n + 1);
    const double lp = std::log(p), lq = std::log1p(-p);
    const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::size_t k = 0; k <= n; ++k) {
      const double kd = static_cast<double>(k);
      pmf[k] = std::exp(lg_n - std::lgamma(kd + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0) + kd * lp +
                        static_cast<double>(n - k) * lq);
    }
    below.assign(n + 2, 0.0);
    below_n.assign(n + 2, 0.0);
    above.assign(n + 2, 0.0);
    above_n.assign(n + 2, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      below[k + 1] = below[k] + pmf[k];
      below_n[k + 1] = below_n[k] + static_cast<double>(k) * pmf[k];
    }
    for (std::size_t k = n + 1; k-- > 0;) {
      above[k] = above[k + 1] + pmf[k];
      above_n[k] = above_n[k + 1] + static_cast<double>(k) * pmf[k];
    }
  }
};

struct Split {
  double w1 = 0.0, pa1 = 0.0, pa2 = 0.0;
  double gain = 0.0;  // per document
  bool degenerate = true;
};

Split split_at(const SplitTable& tab, std::size_t threshold) {
  Split s;
  s.w1 = tab.above[threshold];
  const double w2 = tab.below[threshold];
  if (!(s.w1 > 0.0) || !(w2 > 0.0)) return s;
  const double l = static_cast<double>(tab.n);
  s.pa1 = std::min(1.0, tab.above_n[threshold] / (s.w1 * l));
  s.pa2 = std::min(1.0, tab.below_n[threshold] / (w2 * l));
  s.gain = l * (binary_entropy(tab.p) - s.w1 * binary_entropy(s.pa1) - w2 * binary_entropy(s.pa2));
  s.degenerate = false;
  return s;
}

void check_split_args(std::size_t doc_length, std::size_t num_words, std::size_t a, std::size_t threshold) {
  if (doc_length < 1 || num_words < 2) throw ConfigError("need L_d >= 1 and N_w >= 2");
  if (a < 1 || a >= num_words) throw ConfigError("split size a must lie in [1, N_w - 1]");
  if (threshold < 1 || threshold > doc_length) throw ConfigError("threshold T must lie in [1, L_d]");
}

double group_prob(std::size_t a, std::size_t num_words) {
  return static_cast<double>(a) / static_cast<double>(num_words);
}

OverfitGain best_threshold(std::size_t doc_length, std::size_t num_words, std::size_t a) {
  const SplitTable tab(doc_length, group_prob(a, num_words));
  OverfitGain best{0.0, a, 1};
  for (std::size_t t = 1; t <= doc_length; ++t) {
    const Split s = split_at(tab, t);
    if (s.gain > best.gain) best = {s.gain, a, t};
  }
  return best;
}

double gain_fixed_threshold(std::size_t doc_length, std::size_t num_words, std::size_t a, std::size_t threshold) {
  return split_at(SplitTable(doc_length, group_prob(a, num_words)), threshold).gain;
}

}  // namespace

void LanguageParams::validate() const {
  if (doc_length < 1 || num_words < 1) throw ConfigError("L_d and N_w must be positive");
  if (f_e < 0.0 || f_u < 0.0 || f_e + f_u > 1.0 + 1e-12) throw ConfigError("need f_E, f_U >= 0 and f_E + f_U <= 1");
}

void HierarchyParams::validate() const {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!prob(p_e) || !prob(p_k)) throw ConfigError("p_E and p_k must lie in [0, 1]");
  if (unique_words < 0.0 || common_words < 0.0) throw ConfigError("U and C must be non-negative");
  if (unique_words + common_words < 1.0) throw ConfigError("U + C must be at least 1");
  if (doc_length < 1) throw ConfigError("L_d must be positive");
}

double true_loglik_per_doc(std::size_t doc_length, std::size_t num_words) {
  if (doc_length < 1 || num_words < 1) throw ConfigError("L_d and N_w must be positive");
  return -static_cast<double>(doc_length) * std::log(static_cast<double>(num_words));
}

double enumerate_alt_likelihood(std::size_t doc_length, std::size_t num_words, std::size_t a, std::size_t threshold) {
  check_split_args(doc_length, num_words, a, threshold);
  return true_loglik_per_doc(doc_length, num_words) + gain_fixed_threshold(doc_length, num_words, a, threshold);
}

OverfitGain overfit_gain(std::size_t doc_length, std::size_t num_words) {
  if (doc_length < 2 || num_words < 2) throw ConfigError("overfit_gain needs L_d, N_w >= 2");
  const std::size_t a_max = num_words / 2;
  if (static_cast<double>(doc_length) * static_cast<double>(num_words) <= kExhaustiveLimit) {
    OverfitGain best;
    for (std::size_t a = 1; a <= a_max; ++a) {
      const OverfitGain g = best_threshold(doc_length, num_words, a);
      if (g.gain > best.gain) best = g;
    }
    return best;
  }
  const std::size_t threshold =
      num_words >= doc_length ? 1 : (doc_length + num_words - 1) / num_words;
  auto f = [&](std::size_t a) { return gain_fixed_threshold(doc_length, num_words, a, threshold); };
  // Golden-section search on integers, then a scan of the final bracket.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  std::size_t lo = 1, hi = a_max;
  while (hi - lo > 4) {
    const auto span = static_cast<double>(hi - lo);
    const std::size_t m1 = hi - static_cast<std::size_t>(std::llround(inv_phi * span));
    const std::size_t m2 = lo + static_cast<std::size_t>(std::llround(inv_phi * span));
    if (m1 >= m2) break;
    // Beyond the peak the gain flattens to rounding noise around 0; near
    // ties keep the lower bracket.
    if (f(m1) < f(m2) - 1e-12) {
      lo = m1 + 1;
    } else {
      hi = m2 - 1;
    }
  }
  OverfitGain best{f(1), 1, threshold};
  for (std::size_t a = std::max<std::size_t>(lo, 2); a <= hi; ++a) {
    const double g = f(a);
    if (g > best.gain) best = {g, a, threshold};
  }
  return best;
}

double symmetric_gap(const LanguageParams& p, double c) {
  p.validate();
  return p.f_e * c - p.f_u * static_cast<double>(p.doc_length) * kLn2;
}

double asymmetric_gap(const LanguageParams& p, double c) {
  p.validate();
  return -p.f_e * (kLn2 - c) - p.f_u * (static_cast<double>(p.doc_length) - 1.0) * kLn2;
}

double critical_fraction(std::size_t doc_length, double c) {
  const double u = static_cast<double>(doc_length) * kLn2;
  return u / (c + u);
}

double loglik_ratio(double f_u, std::size_t num_words) {
  if (f_u < 0.0 || f_u > 1.0) throw ConfigError("f_U must lie in [0, 1]");
  if (num_words < 2) throw ConfigError("loglik_ratio needs N_w >= 2");
  return 1.0 - f_u * kLn2 / std::log(static_cast<double>(num_words));
}

double count_alt_models(std::size_t num_words, std::size_t a) {
  if (a < 1 || a >= num_words) throw ConfigError("need 0 < a < N_w");
  const double n = static_cast<double>(num_words), k = static_cast<double>(a);
  return (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) / std::numbers::ln10;
}

HierarchyResult hierarchy_competition(const HierarchyParams& p) {
  p.validate();
  const double l = static_cast<double>(p.doc_length);
  const double share = p.unique_words / (p.unique_words + p.common_words);
  HierarchyResult r;
  r.threshold = p.p_e * share;
  r.symmetric_gap = l * kLn2 * (2.0 * p.p_k - p.p_e * share);
  r.asymmetric_gap = kLn2 * (2.0 * p.p_k * (l - 1.0) - p.p_e * (l * share - 1.0));
  r.model1_wins_symmetric = r.symmetric_gap > 0.0;
  r.model1_wins_asymmetric = r.asymmetric_gap > 0.0;
  return r;
}

EmpiricalGap empirical_symmetric_gap(const LanguageParams& p, std::size_t num_docs, std::uint64_t seed) {
  p.validate();
  if (num_docs < 2) throw ConfigError("need at least two documents");
  if (!(p.f_e > 0.0) || !(p.f_u > 0.0)) throw ConfigError("empirical gap needs f_E > 0 and f_U > 0");
  const std::size_t l_d = p.doc_length, n_w = p.num_words;
  const OverfitGain best = overfit_gain(l_d, n_w);
  const SplitTable tab(l_d, group_prob(best.a, n_w));
  const Split s = split_at(tab, best.threshold);

  std::vector<double> fractions{p.f_e, p.f_u / 2.0, p.f_u / 2.0};
  const double rest = 1.0 - p.f_e - p.f_u;
  if (rest > 1e-12) fractions.push_back(rest);
  const auto g = gen_language_corpus(LanguageSpec::uniform(fractions, n_w, l_d, num_docs), seed);

  const double a = static_cast<double>(best.a), b = static_cast<double>(n_w - best.a);
  // Per-word log-probabilities of the two dialects for groups a and b.
  const double la1 = std::log(s.pa1 / a), lb1 = std::log1p(-s.pa1) - std::log(b);
  const double la2 = s.pa2 > 0.0 ? std::log(s.pa2 / a) : 0.0;
  const double lb2 = s.pa2 < 1.0 ? std::log1p(-s.pa2) - std::log(b) : 0.0;
  const double ld = static_cast<double>(l_d);
  const double true_ll = true_loglik_per_doc(l_d, n_w);

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t d = 0; d < num_docs; ++d) {
    const auto theta = g.truth.theta_row(d);
    const auto lang = static_cast<std::size_t>(std::max_element(theta.begin(), theta.end()) - theta.begin());
    double diff = 0.0;
    if (lang == 0) {
      double n_a = 0.0;
      for (const Entry& e : g.corpus.doc(d).entries()) {
        if (e.word < best.a) n_a += static_cast<double>(e.count);
      }
      const double alt = n_a >= static_cast<double>(best.threshold) ? n_a * la1 + (ld - n_a) * lb1
                                                                    : n_a * la2 + (ld - n_a) * lb2;
      diff = alt - true_ll;
    } else if (lang <= 2) {
      diff = -ld * std::log(2.0 * static_cast<double>(n_w)) - true_ll;
    }
    sum += diff;
    sum_sq += diff * diff;
  }
  const double n = static_cast<double>(num_docs);
  EmpiricalGap r;
  r.mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * r.mean * r.mean) / (n - 1.0));
  r.std_error = std::sqrt(var / n);
  r.expected = symmetric_gap(p, best.gain);
  return r;
}

std::vector<GainPoint> gain_curve(std::size_t num_words, const std::vector<std::size_t>& doc_lengths,
                                  std::size_t threads) {
  std::vector<GainPoint> out(doc_lengths.size());
  parallel_for(doc_lengths.size(), threads, [&](std::size_t i) {
    out[i] = {doc_lengths[i], num_words, overfit_gain(doc_lengths[i], num_words)};
  });
  return out;
}

}  // namespace topicatlas

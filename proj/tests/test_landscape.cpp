#include <cmath>
#include <numbers>

#include "doctest.h"
#include "topicatlas/error.hpp"
#include "topicatlas/landscape.hpp"
#include "topicatlas/rng.hpp"

using namespace topicatlas;

namespace {

const double kLn2 = std::log(2.0);

double binom_pmf(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                  (n - k) * std::log1p(-p));
}

// Expected dialect log-likelihood minus the true one, built from the
// per-document likelihoods with the optimal f and g of each dialect.
double gain_oracle(int l, int n_w, int a, int t) {
  const double p = static_cast<double>(a) / n_w;
  double w1 = 0, m1 = 0, w2 = 0, m2 = 0;
  for (int k = 0; k <= l; ++k) {
    const double q = binom_pmf(l, k, p);
    if (k >= t) {
      w1 += q;
      m1 += q * k;
    } else {
      w2 += q;
      m2 += q * k;
    }
  }
  if (w1 <= 0 || w2 <= 0) return 0.0;
  const double pa1 = m1 / w1 / l, pa2 = m2 / w2 / l;
  auto term = [](double count, double prob, double size) { return count > 0 ? count * std::log(prob / size) : 0.0; };
  double ll = 0.0;
  for (int k = 0; k <= l; ++k) {
    const double q = binom_pmf(l, k, p);
    const double pa = k >= t ? pa1 : pa2;
    ll += q * (term(k, pa, a) + term(l - k, 1.0 - pa, n_w - a));
  }
  return ll + l * std::log(static_cast<double>(n_w));
}

double brute_max_gain(int l, int n_w) {
  double best = 0.0;
  for (int a = 1; a < n_w; ++a) {
    for (int t = 1; t <= l; ++t) best = std::max(best, gain_oracle(l, n_w, a, t));
  }
  return best;
}

}  // namespace

TEST_CASE("true log-likelihood per document") {
  CHECK(true_loglik_per_doc(10, 20) == doctest::Approx(-10.0 * std::log(20.0)));
  CHECK(true_loglik_per_doc(10, 20) == doctest::Approx(-29.957).epsilon(1e-4));
  CHECK(true_loglik_per_doc(7, 1) == 0.0);
  CHECK(true_loglik_per_doc(20, 20) == doctest::Approx(2.0 * true_loglik_per_doc(10, 20)));
}

TEST_CASE("overfit gain matches the brute-force maximum") {
  for (int l : {2, 3, 5, 10, 17}) {
    for (int n_w : {2, 3, 6, 20, 31}) {
      CAPTURE(l);
      CAPTURE(n_w);
      const OverfitGain g = overfit_gain(l, n_w);
      CHECK(g.gain == doctest::Approx(brute_max_gain(l, n_w)).epsilon(1e-9));
      CHECK(g.gain == doctest::Approx(gain_oracle(l, n_w, static_cast<int>(g.a), static_cast<int>(g.threshold))).epsilon(1e-9));
      CHECK(2 * g.a <= static_cast<std::size_t>(n_w));
    }
  }
}

TEST_CASE("overfit gain constants") {
  CHECK(overfit_gain(10, 20).gain == doctest::Approx(0.476).epsilon(0.001 / 0.476));
  CHECK(overfit_gain(100, 1000).a == 7);
  // Limit for L_d >> 1 with N_w >= L_d; N_w is large enough for the best
  // integer a to sit near N_w ln2 / L_d.
  CHECK(std::abs(overfit_gain(500, 5000).gain - kLn2 * kLn2) < 0.01);
  CHECK(std::abs(overfit_gain(1000, 10000).gain - kLn2 * kLn2) < 0.01);
  // Limit for L_d >> N_w.
  CHECK(std::abs(overfit_gain(10000, 100).gain - 1.0 / std::numbers::pi) < 0.01);
}

TEST_CASE("integer split size at L_d = 500, N_w = 1000") {
  // N_w ln2 / L_d = 1.39 words, so a = 1 is far from the continuous optimum
  // and the gain stays below (ln 2)^2.
  const OverfitGain g = overfit_gain(500, 1000);
  CHECK(g.a == 1);
  CHECK(g.gain == doctest::Approx(gain_oracle(500, 1000, 1, static_cast<int>(g.threshold))).epsilon(1e-9));
  CHECK(g.gain < kLn2 * kLn2);
}

TEST_CASE("gain stays inside (0, ln 2)") {
  for (std::size_t l : {2, 5, 20, 100, 400}) {
    for (std::size_t n_w : {2, 10, 50, 300, 1000}) {
      const double c = overfit_gain(l, n_w).gain;
      CHECK(c > 0.0);
      CHECK(c < kLn2);
    }
  }
}

TEST_CASE("heuristic regime") {
  // L_d * N_w above the exhaustive limit: T = ceil(L_d / N_w), search over a.
  const OverfitGain g = overfit_gain(20000, 1000);
  CHECK(g.threshold == 20);
  double best = 0.0;
  for (std::size_t a = 1; a <= 500; a += (a < 20 ? 1 : 25)) {
    best = std::max(best, enumerate_alt_likelihood(20000, 1000, a, 20) - true_loglik_per_doc(20000, 1000));
  }
  CHECK(g.gain >= best - 1e-9);
  CHECK(std::abs(g.gain - 1.0 / std::numbers::pi) < 0.01);
  const OverfitGain h = overfit_gain(2000, 100000);
  CHECK(h.threshold == 1);
  CHECK(std::abs(h.gain - kLn2 * kLn2) < 0.01);
}

TEST_CASE("alternative likelihood by enumeration") {
  const OverfitGain g = overfit_gain(10, 20);
  const double alt = enumerate_alt_likelihood(10, 20, g.a, g.threshold);
  CHECK(alt == doctest::Approx(true_loglik_per_doc(10, 20) + g.gain));
  CHECK(alt >= true_loglik_per_doc(10, 20));
  CHECK(enumerate_alt_likelihood(10, 20, 3, 2) ==
        doctest::Approx(true_loglik_per_doc(10, 20) + gain_oracle(10, 20, 3, 2)).epsilon(1e-12));
  // a = 19, T = 1: almost every document uses dialect 1.
  CHECK(enumerate_alt_likelihood(10, 20, 19, 1) - true_loglik_per_doc(10, 20) < 1e-9);
  CHECK_THROWS_AS(enumerate_alt_likelihood(10, 20, 0, 1), ConfigError);
  CHECK_THROWS_AS(enumerate_alt_likelihood(10, 20, 3, 11), ConfigError);
  CHECK_THROWS_AS(enumerate_alt_likelihood(10, 20, 3, 0), ConfigError);
}

TEST_CASE("alternative likelihood against simulation") {
  const int l = 10, n_w = 20, a = 3, t = 2;
  // Optimal dialect parameters, from the binomial sums.
  double w1 = 0, m1 = 0, w2 = 0, m2 = 0;
  for (int k = 0; k <= l; ++k) {
    const double q = binom_pmf(l, k, static_cast<double>(a) / n_w);
    (k >= t ? w1 : w2) += q;
    (k >= t ? m1 : m2) += q * k;
  }
  const double pa1 = m1 / w1 / l, pa2 = m2 / w2 / l;
  Rng rng(11, 0);
  const int docs = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int d = 0; d < docs; ++d) {
    int k = 0;
    for (int i = 0; i < l; ++i) k += rng.uniform_int(n_w) < static_cast<std::uint64_t>(a) ? 1 : 0;
    const double pa = k >= t ? pa1 : pa2;
    const double ll = k * std::log(pa / a) + (l - k) * std::log((1.0 - pa) / (n_w - a));
    sum += ll;
    sum_sq += ll * ll;
  }
  const double mean = sum / docs;
  const double se = std::sqrt((sum_sq / docs - mean * mean) / docs);
  CHECK(std::abs(mean - enumerate_alt_likelihood(l, n_w, a, t)) < 3.0 * se);
}

TEST_CASE("symmetric gap") {
  const double c = overfit_gain(10, 20).gain;
  CHECK(symmetric_gap({10, 20, 3, 0.0, 0.5}, c) < 0.0);
  CHECK(symmetric_gap({10, 20, 3, 1.0, 0.0}, c) == doctest::Approx(c));
  const double root = critical_fraction(10, c);
  CHECK(std::abs(root - 0.936) < 0.001);
  CHECK(symmetric_gap({10, 20, 3, root, 1.0 - root}, c) == doctest::Approx(0.0).epsilon(1e-12));
  // Monotone in f_E along f_U = 1 - f_E, so the root is unique.
  double prev = -1e300;
  for (int i = 0; i <= 100; ++i) {
    const double fe = i / 100.0;
    const double g = symmetric_gap({10, 20, 3, fe, 1.0 - fe}, c);
    CHECK(g > prev);
    CHECK((g > 0.0) == (fe > root));
    prev = g;
  }
  CHECK_THROWS_AS(symmetric_gap({10, 20, 3, 0.7, 0.7}, c), ConfigError);
}

TEST_CASE("asymmetric gap") {
  const double c = overfit_gain(10, 20).gain;
  for (double fe : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (double fu : {0.0, 0.05, 0.5}) {
      if (fe + fu > 1.0 || fe + fu == 0.0) continue;
      CHECK(asymmetric_gap({10, 20, 3, fe, fu}, c) < 0.0);
    }
  }
  CHECK(asymmetric_gap({10, 20, 3, 0.0, 0.0}, c) == 0.0);
  CHECK(asymmetric_gap({2, 20, 3, 0.0, 1.0}, c) == doctest::Approx(-kLn2));
}

TEST_CASE("log-likelihood ratio") {
  CHECK(std::abs(loglik_ratio(0.2, 1000) - 0.980) < 0.001);
  CHECK(loglik_ratio(0.0, 1000) == 1.0);
  double prev = 2.0;
  for (int i = 0; i <= 10; ++i) {
    const double r = loglik_ratio(i / 10.0, 1000);
    CHECK(r < prev);
    prev = r;
  }
  CHECK_THROWS_AS(loglik_ratio(1.5, 1000), ConfigError);
}

TEST_CASE("counting alternative models") {
  auto direct = [](int n, int a) {
    double s = 0.0;
    for (int i = 1; i <= a; ++i) s += std::log10(static_cast<double>(n - a + i) / i);
    return s;
  };
  CHECK(count_alt_models(1000, 7) == doctest::Approx(direct(1000, 7)).epsilon(1e-10));
  CHECK(count_alt_models(1000, 500) == doctest::Approx(direct(1000, 500)).epsilon(1e-10));
  CHECK(std::abs(count_alt_models(1000, 7) - 17.0) < 0.5);
  CHECK(std::abs(count_alt_models(1000, 500) - 299.5) < 1.0);
  CHECK(count_alt_models(1000, 1) == doctest::Approx(3.0));
  CHECK_THROWS_AS(count_alt_models(10, 10), ConfigError);
}

TEST_CASE("hierarchy competition") {
  HierarchyParams p;
  p.p_e = 0.5;
  p.unique_words = 50;
  p.common_words = 900;
  const double th = hierarchy_competition(p).threshold;
  CHECK(std::abs(th - 0.0263) < 0.0005);
  p.p_k = 0.4 * th;
  CHECK_FALSE(hierarchy_competition(p).model1_wins_symmetric);
  p.p_k = 0.6 * th;
  CHECK(hierarchy_competition(p).model1_wins_symmetric);

  SUBCASE("no private words") {
    p.unique_words = 0;
    for (double pk : {0.001, 0.01, 0.1}) {
      p.p_k = pk;
      const auto r = hierarchy_competition(p);
      CHECK(r.model1_wins_symmetric);
      CHECK(r.model1_wins_asymmetric);
    }
  }
  SUBCASE("asymmetric correction shrinks like 1/L_d") {
    p.p_k = 0.05;
    p.doc_length = 1000;
    const auto r = hierarchy_competition(p);
    const double rel = std::abs(r.asymmetric_gap - r.symmetric_gap) / std::abs(r.symmetric_gap);
    CHECK(rel < 10.0 / 1000.0);
    p.doc_length = 10000;
    const auto r2 = hierarchy_competition(p);
    CHECK(std::abs(r2.asymmetric_gap - r2.symmetric_gap) / std::abs(r2.symmetric_gap) ==
          doctest::Approx(rel / 10.0).epsilon(0.05));
  }
  SUBCASE("errors") {
    p.unique_words = 0;
    p.common_words = 0;
    CHECK_THROWS_AS(hierarchy_competition(p), ConfigError);
  }
}

TEST_CASE("closed form against a generated three-language corpus") {
  for (double fe : {0.3, 0.6, 0.9}) {
    const LanguageParams p{10, 20, 3, fe, 1.0 - fe};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const EmpiricalGap e = empirical_symmetric_gap(p, 200, seed);
      CHECK(e.expected == doctest::Approx(symmetric_gap(p, overfit_gain(10, 20).gain)));
      CHECK(std::abs(e.mean - e.expected) < 3.0 * e.std_error);
    }
  }
}

TEST_CASE("gain curve") {
  const auto curve = gain_curve(50, {2, 10, 50, 200}, 2);
  REQUIRE(curve.size() == 4);
  for (const auto& pt : curve) {
    CHECK(pt.num_words == 50);
    CHECK(pt.best.gain == doctest::Approx(overfit_gain(pt.doc_length, 50).gain));
  }
}

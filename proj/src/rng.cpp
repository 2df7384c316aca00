#include "topicatlas/rng.hpp"

#include <algorithm>
#include <cmath>

#include "topicatlas/error.hpp"

namespace topicatlas {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t Rng::next_u64() { return splitmix64(key_ + kGolden * counter_++); }

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw ConfigError("uniform_int: empty range");
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // Marsaglia polar method; the second variate is discarded so the stream
  // position depends only on the number of calls.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0)) throw ConfigError("gamma shape must be positive");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    const double log_u = std::log(uniform_open());
    return log_gamma_variate(shape + 1.0) + log_u / shape;
  }
  // Marsaglia & Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v);
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double Rng::gamma(double shape) { return std::exp(log_gamma_variate(shape)); }

Rng Rng::split(std::uint64_t stream) const {
  Rng child(0);
  child.key_ = splitmix64(key_ ^ splitmix64(stream * kGolden + 0xD1B54A32D192ED03ULL));
  return child;
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
  cumulative_.reserve(weights.size());
  double acc = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw ConfigError("sampler weights must be finite and >= 0");
    acc += w;
    cumulative_.push_back(acc);
  }
  if (!(acc > 0.0)) throw ConfigError("sampler weights sum to zero");
}

std::size_t DiscreteSampler::operator()(Rng& rng) const {
  const double target = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
  if (i >= cumulative_.size()) i = cumulative_.size() - 1;
  return i;
}

}  // namespace topicatlas

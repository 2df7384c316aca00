#pragma once

// Project-wide random number generation.
//
// Every randomized step draws from an Rng built from an explicit (seed,
// stream) pair. The generator is counter based: output i of a stream is
// splitmix64(key + i * golden), so results are identical on every platform
// and compiler. All derived distributions (uniform, normal, gamma, ...) are
// implemented here rather than taken from <random>, whose distribution
// algorithms are implementation defined.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace topicatlas {

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in (0, 1); never returns 0.
  double uniform_open();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);
  double normal();
  // Gamma(shape, 1) for shape > 0.
  double gamma(double shape);
  // log of a Gamma(shape, 1) draw; stays finite for tiny shapes where the
  // draw itself underflows.
  double log_gamma_variate(double shape);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Child generator with an independent stream, derived deterministically.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Sampling from a fixed discrete distribution by cumulative table lookup.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> weights);

  std::size_t operator()(Rng& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

}  // namespace topicatlas

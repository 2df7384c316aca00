#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "topicatlas/corpus.hpp"

namespace topicatlas {

// Undirected weighted word graph in CSR form. Every edge is stored in both
// endpoint rows; weights are z_ab - Z_p(s_a, s_b) >= 1.
class WordGraph {
 public:
  struct Edge {
    WordId a;
    WordId b;
    Count weight;
  };

  WordGraph() = default;
  // Builds from an edge list with a < b and positive weights.
  WordGraph(std::size_t num_nodes, std::vector<Edge> edges, std::vector<WordId> isolated);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  // Words that occur in the corpus but kept no edge.
  const std::vector<WordId>& isolated() const { return isolated_; }

  std::span<const WordId> neighbors(WordId v) const {
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::span<const double> weights(WordId v) const {
    return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(WordId v) const { return offsets_[v + 1] - offsets_[v]; }
  double strength(WordId v) const;
  double total_weight() const { return total_weight_; }

  // Edge list "a b weight", then "# isolated" and one index per line.
  void dump(const std::filesystem::path& path) const;

 private:
  std::vector<Edge> edges_;
  std::vector<WordId> isolated_;
  std::vector<std::size_t> offsets_;
  std::vector<WordId> neighbors_;
  std::vector<double> weights_;
  double total_weight_ = 0.0;
};

// z_ab = sum_d w_a^d w_b^d. Throws ConfigError when a == b.
Count dot_product_sim(const Corpus& corpus, WordId a, WordId b);

// Mean of z_ab under the token-shuffling null: s_a s_b sum_d L_d^2 / L_C^2.
double null_mean(const Corpus& corpus, Count s_a, Count s_b);

// P(Z >= x) for Z ~ Poisson(mean).
double poisson_upper_tail(double mean, Count x);

// Largest x with P(Z >= x) > p for Z ~ Poisson(mean).
Count poisson_quantile(double mean, double p);

struct GraphOptions {
  double p_value = 0.05;
  std::size_t threads = 0;
  // Called with (words processed, total words) from the calling thread.
  std::function<void(std::size_t, std::size_t)> progress;
};

WordGraph build_graph(const Corpus& corpus, const GraphOptions& opts = {});

}  // namespace topicatlas

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "topicatlas/wordgraph.hpp"

namespace topicatlas {

// Hard assignment of graph nodes to modules. Nodes without edges (isolated
// or unused words) carry kUnassigned; every other node has a module id in
// [0, num_modules).
struct Partition {
  static constexpr int kUnassigned = -1;

  std::vector<int> module;
  std::size_t num_modules = 0;

  std::vector<std::vector<WordId>> members() const;
  // Renumbers module ids densely in order of first appearance.
  void compact();
  friend bool operator==(const Partition&, const Partition&) = default;
};

// Two-level map equation (bits) for the undirected random walk whose visit
// rates are proportional to node strength:
//   L(M) = q H(Q) + sum_m p_m H(P_m).
// Throws ConfigError for an edgeless graph or when a node with edges has
// no module.
double codelength(const WordGraph& graph, const Partition& partition);

// One module per connected component.
Partition component_partition(const WordGraph& graph);

struct ClusterOptions {
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

struct ClusterResult {
  Partition partition;
  double codelength = 0.0;
  std::size_t best_trial = 0;
};

// Best of `trials` seeded greedy optimizations (node moves in random order,
// module aggregation, repeated until no move helps, then refined from the
// original nodes). Moves only ever join a node to a neighbor's module, so
// disconnected components are never merged.
ClusterResult cluster(const WordGraph& graph, const ClusterOptions& opts = {});

// "word_index cluster_id" lines for every clustered node.
void save_partition(const Partition& partition, const std::filesystem::path& path);

}  // namespace topicatlas

#pragma once
// Benchmark presets that regenerate plot data as CSV tables, and the
// runtime scaling measurement.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace topicatlas {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  // Header row, then one line per row; fields are never quoted.
  void write_csv(std::ostream& out) const;
};

struct ScalingOptions {
  std::vector<std::size_t> doc_counts{2000, 4000, 8000};
  std::vector<std::size_t> topic_counts{20, 50, 100};
  std::size_t base_docs = 2000;
  std::size_t base_topics = 20;
  std::size_t doc_length = 50;
  std::size_t num_words = 2000;
  double alpha = 1e-3;
  double generic_fraction = 0.3;
  // LDA runs a fixed workload: lda_iters EM steps of lda_var_iters
  // variational steps each.
  std::size_t lda_iters = 3;
  std::size_t lda_var_iters = 20;
  // Each point is timed this many times and the fastest run is kept.
  std::size_t repeats = 2;
  std::uint64_t seed = 1;
};

struct ScalingRow {
  std::string engine;  // "topicmap" (guess stages, no LDA step) or "lda"
  std::size_t docs = 0;
  std::size_t topics = 0;
  double seconds = 0.0;
  // topicmap only.
  double graph_seconds = 0.0;
  double cluster_seconds = 0.0;
  double guess_seconds = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  // Least-squares slope of seconds against D at base_topics, per engine.
  double topicmap_slope = 0.0;
  double lda_slope = 0.0;
};

// Single-threaded. Timings cover compute only; corpora are generated in
// memory beforehand.
ScalingReport measure_scaling(const ScalingOptions& opts = {});
Table scaling_table(const ScalingReport& report);

struct BenchmarkOptions {
  std::uint64_t seed = 1;
  std::size_t runs = 3;
  std::size_t threads = 0;
  std::size_t trials = 10;
  // fig2: corpus sizes of the language sweep.
  std::vector<std::size_t> doc_counts{1000};
  // fig4: grid of Dirichlet concentration and generic-word fraction.
  std::vector<double> alphas{1e-3, 1e-2, 1e-1};
  std::vector<double> generic_fractions{0.0, 0.25, 0.5};
  // figS5: K values of the held-out scan.
  std::vector<std::size_t> k_list{5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
};

// Preset names: fig2, fig4, figS5, figS2, scaling.
const std::vector<std::string>& preset_names();
// Throws ConfigError for an unknown name.
Table run_preset(const std::string& name, const BenchmarkOptions& opts = {});

}  // namespace topicatlas

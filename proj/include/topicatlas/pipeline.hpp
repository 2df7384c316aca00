#pragma once
// The full topicmap run (word graph, clustering, local likelihood
// guess, LDA refinement) and a dispatcher for the baseline engines.

#include <cstdint>
#include <optional>

#include "topicatlas/corpus.hpp"
#include "topicatlas/eval.hpp"
#include "topicatlas/guess.hpp"
#include "topicatlas/infer.hpp"
#include "topicatlas/mapclust.hpp"
#include "topicatlas/wordgraph.hpp"

namespace topicatlas {

struct TopicMapOptions {
  double p_value = 0.05;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t min_topic_docs = 0;
  std::size_t threads = 0;
  // Skip the LDA step and stop at the guess.
  bool refine = true;
  // init, init_model and alpha_mode are overridden by the refinement.
  FitOptions refine_opts;
};

struct StageSeconds {
  double graph = 0.0;
  double cluster = 0.0;
  double guess = 0.0;
  double refine = 0.0;

  double guess_total() const { return graph + cluster + guess; }
  double total() const { return guess_total() + refine; }
};

struct TopicMapResult {
  std::size_t graph_edges = 0;
  ClusterResult clusters;
  EtaSweepResult guess;
  std::optional<FitResult> refined;
  StageSeconds seconds;

  // The refined model when present, else the guess.
  TopicModel model() const;
};

TopicMapResult run_topicmap(const Corpus& corpus, const TopicMapOptions& opts = {});

// lda_fit or plsa_fit. Engine::TopicMap is rejected (it has no K).
FitResult fit_baseline(const Corpus& corpus, Engine engine, std::size_t k, const FitOptions& opts);

}  // namespace topicatlas

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topicatlas/corpus.hpp"
#include "topicatlas/guess.hpp"
#include "topicatlas/topic_model.hpp"

namespace topicatlas {

enum class InitMode { Random, Seeded, FromModel };
enum class AlphaMode { Fixed, OptimizedScalar, Asymmetric };

InitMode parse_init_mode(const std::string& s);
std::string to_string(InitMode m);

struct FitOptions {
  InitMode init = InitMode::Random;
  // Required for InitMode::FromModel; its alpha is used as the start value.
  std::optional<TopicModel> init_model;
  AlphaMode alpha_mode = AlphaMode::OptimizedScalar;
  double initial_alpha = 1.0;
  std::size_t max_iters = 100;
  // Stop once the relative bound improvement drops below this.
  double tolerance = 1e-5;
  // When set, run exactly max_iters iterations (fixed workloads for timing).
  bool fixed_iterations = false;
  std::size_t var_max_iters = 50;
  double var_tolerance = 1e-6;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  // Record a model after iteration 1 and every checkpoint_every iterations
  // (0 disables checkpoints).
  std::size_t checkpoint_every = 0;

  void validate() const;
};

struct FitResult {
  TopicModel model;
  // LDA: variational bound per iteration. PLSA: log-likelihood per iteration.
  std::vector<double> trace;
  std::vector<std::pair<std::size_t, TopicModel>> checkpoints;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// Variational EM for LDA. Throws NumericalError on a non-finite bound.
FitResult lda_fit(const Corpus& corpus, std::size_t k, const FitOptions& opts = {});

// Topics started from K distinct random documents: counts + 1, normalized.
// theta is uniform. Throws ConfigError when K > D.
TopicModel seeded_init(const Corpus& corpus, std::size_t k, std::uint64_t seed);

// lda_fit started from the guess with asymmetric alpha = 0.01 per topic and
// checkpoints at iteration 1 and every opts.checkpoint_every (default 5).
FitResult refine_with_lda(const GuessState& guess, const Corpus& corpus, FitOptions opts = {});

// EM for PLSA on the same likelihood as plsa_loglik. Model alpha is 1.
FitResult plsa_fit(const Corpus& corpus, std::size_t k, const FitOptions& opts = {});

// Variational p(topic|doc) for new documents with the topics held fixed.
// Returns a D x K row-major table.
std::vector<double> fold_in(const TopicModel& model, const Corpus& docs, std::size_t var_max_iters = 50,
                            double var_tolerance = 1e-6, std::size_t threads = 0);

}  // namespace topicatlas

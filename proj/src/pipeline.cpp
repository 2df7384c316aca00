#include "topicatlas/pipeline.hpp"

#include <chrono>

#include "topicatlas/error.hpp"

namespace topicatlas {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

TopicModel TopicMapResult::model() const { return refined ? refined->model : guess.state.to_model(); }

TopicMapResult run_topicmap(const Corpus& corpus, const TopicMapOptions& opts) {
  if (corpus.num_docs() == 0) throw DataError("cannot fit an empty corpus");
  TopicMapResult r;

  auto t0 = Clock::now();
  const WordGraph graph = build_graph(corpus, {.p_value = opts.p_value, .threads = opts.threads, .progress = {}});
  r.graph_edges = graph.num_edges();
  r.seconds.graph = since(t0);

  t0 = Clock::now();
  r.clusters = cluster(graph, {.trials = opts.trials, .seed = opts.seed, .threads = opts.threads});
  r.seconds.cluster = since(t0);

  t0 = Clock::now();
  r.guess = run_guess(corpus, r.clusters.partition, {.min_topic_docs = opts.min_topic_docs, .threads = opts.threads});
  r.seconds.guess = since(t0);

  if (opts.refine) {
    t0 = Clock::now();
    FitOptions fo = opts.refine_opts;
    if (fo.threads == 0) fo.threads = opts.threads;
    r.refined = refine_with_lda(r.guess.state, corpus, fo);
    r.seconds.refine = since(t0);
  }
  return r;
}

FitResult fit_baseline(const Corpus& corpus, Engine engine, std::size_t k, const FitOptions& opts) {
  switch (engine) {
    case Engine::Lda:
      return lda_fit(corpus, k, opts);
    case Engine::Plsa:
      return plsa_fit(corpus, k, opts);
    case Engine::TopicMap:
      break;
  }
  throw ConfigError("topicmap finds K itself; use run_topicmap");
}

}  // namespace topicatlas

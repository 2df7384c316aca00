#include <doctest.h>

#include <map>

#include "topicatlas/bench.hpp"
#include "topicatlas/pipeline.hpp"
#include "topicatlas/syngen.hpp"

using namespace topicatlas;

namespace {

const ScalingReport& report() {
  static const ScalingReport r = measure_scaling();
  return r;
}

double seconds(const std::string& engine, std::size_t docs, std::size_t topics) {
  for (const auto& r : report().rows) {
    if (r.engine == engine && r.docs == docs && r.topics == topics) return r.seconds;
  }
  FAIL("missing row");
  return 0.0;
}

}  // namespace

TEST_CASE("doubling D roughly doubles the runtime") {
  const ScalingOptions o;
  for (const std::string engine : {"topicmap", "lda"}) {
    for (std::size_t i = 1; i < o.doc_counts.size(); ++i) {
      const double ratio = seconds(engine, o.doc_counts[i], o.base_topics) /
                           seconds(engine, o.doc_counts[i - 1], o.base_topics);
      INFO(engine, " D ", o.doc_counts[i - 1], " -> ", o.doc_counts[i], " ratio ", ratio);
      CHECK(ratio >= 1.6);
      CHECK(ratio <= 2.6);
    }
  }
}

TEST_CASE("topicmap grows more slowly in K than LDA") {
  const ScalingOptions o;
  const std::size_t k0 = o.topic_counts.front(), k1 = o.topic_counts.back();
  const double tm = seconds("topicmap", o.base_docs, k1) / seconds("topicmap", o.base_docs, k0);
  const double lda = seconds("lda", o.base_docs, k1) / seconds("lda", o.base_docs, k0);
  INFO("topicmap ", tm, " lda ", lda);
  CHECK(tm < lda);
  CHECK(report().lda_slope > 0.0);
}

TEST_CASE("timing leaves the fitted model unchanged") {
  DirichletSpec spec = DirichletSpec::equal_topics(5);
  spec.num_docs = 200;
  spec.num_words = 300;
  const auto g = gen_dirichlet_corpus(spec, 2);
  TopicMapOptions o;
  o.refine_opts.max_iters = 5;
  const TopicModel a = run_topicmap(g.corpus, o).model();
  const TopicModel b = run_topicmap(g.corpus, o).model();
  CHECK(a == b);
}

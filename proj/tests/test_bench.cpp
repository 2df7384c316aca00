#include <doctest.h>

#include <set>
#include <sstream>
#include <tuple>

#include "topicatlas/bench.hpp"
#include "topicatlas/error.hpp"
#include "topicatlas/landscape.hpp"

using namespace topicatlas;

TEST_CASE("table rejects ragged rows and writes plain csv") {
  Table t;
  t.columns = {"a", "b"};
  t.add({"1", "2"});
  CHECK_THROWS_AS(t.add({"1"}), ConfigError);
  std::ostringstream s;
  t.write_csv(s);
  CHECK(s.str() == "a,b\n1,2\n");
}

TEST_CASE("unknown preset and zero runs are configuration errors") {
  CHECK_THROWS_AS(run_preset("fig9"), ConfigError);
  BenchmarkOptions o;
  o.runs = 0;
  CHECK_THROWS_AS(run_preset("figS2", o), ConfigError);
  CHECK(preset_names().size() == 5);
}

TEST_CASE("figS2 rows agree with overfit_gain") {
  const Table t = run_preset("figS2");
  REQUIRE(!t.rows.empty());
  for (const auto& r : t.rows) {
    const auto l = std::stoul(r[0]);
    const auto n = std::stoul(r[1]);
    const OverfitGain g = overfit_gain(l, n);
    CHECK(std::stod(r[3]) == doctest::Approx(g.gain).epsilon(1e-5));
    CHECK(std::stoul(r[4]) == g.a);
  }
}

TEST_CASE("scaling grid has one row per engine, D and K") {
  ScalingOptions o;
  o.doc_counts = {100, 200};
  o.topic_counts = {5, 10};
  o.base_docs = 100;
  o.base_topics = 5;
  o.num_words = 300;
  o.doc_length = 20;
  o.lda_iters = 1;
  o.lda_var_iters = 2;
  const ScalingReport rep = measure_scaling(o);
  // (100,5) (200,5) (100,10), each for two engines.
  CHECK(rep.rows.size() == 6);
  std::set<std::tuple<std::string, std::size_t, std::size_t>> keys;
  for (const auto& r : rep.rows) {
    keys.emplace(r.engine, r.docs, r.topics);
    CHECK(r.seconds >= 0.0);
  }
  CHECK(keys.size() == 6);
  CHECK(scaling_table(rep).rows.size() == 6);
}

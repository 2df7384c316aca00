#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "doctest.h"
#include "topicatlas/error.hpp"
#include "topicatlas/mapclust.hpp"
#include "topicatlas/syngen.hpp"

using namespace topicatlas;

namespace {

double plogp(double x) { return x > 0 ? x * std::log2(x) : 0.0; }

// Map equation straight from the edge list.
double oracle_codelength(const std::vector<WordGraph::Edge>& edges, const std::vector<int>& module) {
  double two_w = 0.0;
  std::map<int, double> p, q;
  std::map<WordId, double> node;
  for (const auto& e : edges) {
    const double w = static_cast<double>(e.weight);
    two_w += 2.0 * w;
    node[e.a] += w;
    node[e.b] += w;
    p[module[e.a]] += w;
    p[module[e.b]] += w;
    if (module[e.a] != module[e.b]) {
      q[module[e.a]] += w;
      q[module[e.b]] += w;
    }
  }
  double q_total = 0.0, exit_terms = 0.0, module_terms = 0.0, node_terms = 0.0;
  for (auto [m, pm] : p) {
    const double qm = q[m] / two_w;
    q_total += qm;
    exit_terms += plogp(qm);
    module_terms += plogp(qm + pm / two_w);
  }
  for (auto [v, s] : node) node_terms += plogp(s / two_w);
  return plogp(q_total) - 2.0 * exit_terms - node_terms + module_terms;
}

// All set partitions of n nodes as restricted growth strings.
void for_each_partition(std::size_t n, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> a(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_label) {
    if (i == n) {
      fn(a);
      return;
    }
    for (int m = 0; m <= max_label + 1; ++m) {
      a[i] = m;
      rec(i + 1, std::max(max_label, m));
    }
  };
  a[0] = 0;
  rec(1, 0);
}

std::vector<WordGraph::Edge> two_triangles(Count clique, Count bridge) {
  std::vector<WordGraph::Edge> e{{0, 1, clique}, {0, 2, clique}, {1, 2, clique},
                                 {3, 4, clique}, {3, 5, clique}, {4, 5, clique}};
  if (bridge > 0) e.push_back({2, 3, bridge});
  return e;
}

Partition make(std::vector<int> m) {
  Partition p;
  p.module = std::move(m);
  p.compact();
  return p;
}

std::pair<std::vector<int>, double> exhaustive_best(const std::vector<WordGraph::Edge>& edges, std::size_t n) {
  std::vector<int> best;
  double best_len = std::numeric_limits<double>::infinity();
  for_each_partition(n, [&](const std::vector<int>& a) {
    const double l = oracle_codelength(edges, a);
    if (l < best_len - 1e-12) {
      best_len = l;
      best = a;
    }
  });
  return {best, best_len};
}

}  // namespace

TEST_CASE("single module codelength is the node entropy") {
  const auto edges = two_triangles(1, 1);
  const WordGraph g(6, edges, {});
  const Partition one = make(std::vector<int>(6, 0));
  double h = 0.0;
  for (WordId v = 0; v < 6; ++v) h -= plogp(g.strength(v) / (2.0 * g.total_weight()));
  CHECK(codelength(g, one) == doctest::Approx(h).epsilon(1e-12));
}

TEST_CASE("codelength matches the edge-list oracle on every partition") {
  const auto edges = two_triangles(5, 2);
  const WordGraph g(6, edges, {});
  for_each_partition(6, [&](const std::vector<int>& a) {
    CHECK(codelength(g, make(a)) == doctest::Approx(oracle_codelength(edges, a)).epsilon(1e-12));
  });
}

TEST_CASE("disconnected triangles prefer two modules") {
  const auto edges = two_triangles(1, 0);
  const WordGraph g(6, edges, {});
  const double split = codelength(g, make({0, 0, 0, 1, 1, 1}));
  const double merged = codelength(g, make({0, 0, 0, 0, 0, 0}));
  CHECK(split < merged);
  CHECK(merged - split > 0.5);
  const auto [best, best_len] = exhaustive_best(edges, 6);
  CHECK(split == doctest::Approx(best_len).epsilon(1e-12));
}

TEST_CASE("cluster finds the exhaustive optimum on weakly joined triangles") {
  const auto edges = two_triangles(100, 1);
  const WordGraph g(6, edges, {});
  const auto [best, best_len] = exhaustive_best(edges, 6);
  const ClusterResult r = cluster(g);
  CHECK(r.partition.num_modules == 2);
  CHECK(r.partition == make(best));
  CHECK(r.codelength == doctest::Approx(best_len).epsilon(1e-12));
}

TEST_CASE("cluster matches exhaustive search on small random graphs") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<WordGraph::Edge> edges;
    for (WordId a = 0; a < 7; ++a) {
      for (WordId b = a + 1; b < 7; ++b) {
        if (rng.uniform() < 0.45) edges.push_back({a, b, static_cast<Count>(1 + rng.uniform_int(9))});
      }
    }
    if (edges.empty()) continue;
    const WordGraph g(7, edges, {});
    const ClusterResult r = cluster(g);
    // Nodes without edges take no part; enumerate over the others only.
    std::vector<WordId> active;
    for (WordId v = 0; v < 7; ++v) {
      if (g.degree(v) > 0) active.push_back(v);
    }
    double best = std::numeric_limits<double>::infinity();
    for_each_partition(active.size(), [&](const std::vector<int>& a) {
      std::vector<int> full(7, -1);
      for (std::size_t i = 0; i < active.size(); ++i) full[active[i]] = a[i];
      best = std::min(best, oracle_codelength(edges, full));
    });
    CHECK(r.codelength == doctest::Approx(codelength(g, r.partition)).epsilon(1e-12));
    CHECK(r.codelength <= best + 1e-9);
  }
}

TEST_CASE("partition invariants") {
  const auto gen = gen_dirichlet_corpus(DirichletSpec::equal_topics(20), 3);
  const WordGraph g = build_graph(gen.corpus);
  const ClusterResult r = cluster(g, {.trials = 3, .seed = 4});
  std::vector<bool> used(r.partition.num_modules, false);
  for (WordId v = 0; v < g.num_nodes(); ++v) {
    const int m = r.partition.module[v];
    if (g.degree(v) == 0) {
      CHECK(m == Partition::kUnassigned);
    } else {
      REQUIRE(m >= 0);
      REQUIRE(static_cast<std::size_t>(m) < r.partition.num_modules);
      used[static_cast<std::size_t>(m)] = true;
    }
  }
  for (bool u : used) CHECK(u);
  Partition one = r.partition;
  for (int& m : one.module) {
    if (m != Partition::kUnassigned) m = 0;
  }
  one.compact();
  CHECK(r.codelength <= codelength(g, one) + 1e-12);
}

TEST_CASE("language graph splits exactly into its components") {
  const auto gen = gen_language_corpus(LanguageSpec::egalitarian(50, 50, 1000), 2);
  const WordGraph g = build_graph(gen.corpus);
  const ClusterResult r = cluster(g);
  CHECK(r.partition.num_modules == 10);
  for (const auto& members : r.partition.members()) {
    for (WordId w : members) CHECK(w / 50 == members.front() / 50);
  }
  CHECK(r.partition == component_partition(g));
}

TEST_CASE("more trials never do worse and runs are deterministic") {
  DirichletSpec spec = DirichletSpec::equal_topics(20);
  const auto gen = gen_dirichlet_corpus(spec, 9);
  const WordGraph g = build_graph(gen.corpus);
  const ClusterResult one = cluster(g, {.trials = 1, .seed = 12});
  const ClusterResult ten = cluster(g, {.trials = 10, .seed = 12});
  CHECK(ten.codelength <= one.codelength);
  const ClusterResult again = cluster(g, {.trials = 10, .seed = 12, .threads = 3});
  CHECK(again.partition == ten.partition);
  CHECK(again.codelength == ten.codelength);
}

TEST_CASE("errors") {
  const WordGraph empty(4, {}, {});
  CHECK_THROWS_AS(codelength(empty, make({0, 0, 0, 0})), ConfigError);
  const WordGraph g(6, two_triangles(1, 1), {});
  CHECK_THROWS_AS(codelength(g, make({0, 0, 0, -1, 1, 1})), ConfigError);
  CHECK_THROWS_AS(cluster(g, {.trials = 0}), ConfigError);
}

#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "topicatlas/error.hpp"
#include "topicatlas/guess.hpp"
#include "topicatlas/syngen.hpp"

using namespace topicatlas;

namespace {

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_bagofwords(in);
}

Partition make(std::vector<int> m) {
  Partition p;
  p.module = std::move(m);
  p.compact();
  return p;
}

// P(X >= x) by summing the pmf directly.
double binomial_tail_oracle(int n, int x, double p) {
  double s = 0.0;
  for (int k = x; k <= n; ++k) {
    s += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                  (n - k) * std::log1p(-p));
  }
  return s;
}

// Likelihood evaluated from explicitly built dense tables.
double loglik_oracle(const Corpus& c, const GuessState& s) {
  const std::size_t k = s.num_topics();
  std::vector<std::vector<double>> n(c.vocab_size(), std::vector<double>(k, 0.0));
  std::vector<double> n_t(k, 0.0);
  std::vector<std::vector<double>> x(c.num_docs(), std::vector<double>(k, 0.0));
  for (std::size_t d = 0; d < c.num_docs(); ++d) {
    const auto& e = c.doc(d).entries();
    for (std::size_t i = 0; i < e.size(); ++i) {
      const auto t = static_cast<std::size_t>(s.assignment()[d][i]);
      n[e[i].word][t] += e[i].count;
      n_t[t] += e[i].count;
      x[d][t] += e[i].count;
    }
  }
  const double l_c = static_cast<double>(c.total_length());
  double ll = 0.0;
  for (std::size_t d = 0; d < c.num_docs(); ++d) {
    const double l_d = static_cast<double>(c.doc(d).length());
    for (const auto& e : c.doc(d).entries()) {
      double p = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        if (n_t[t] > 0) p += n[e.word][t] / n_t[t] * x[d][t] / l_d;
      }
      ll += e.count * std::log(p);
    }
    ll += l_d * std::log(l_d / l_c);
  }
  return ll;
}

// Six short documents, biology words 0-3 and math words 4-7; words 8 and 9
// appear once in every document and belong to no cluster.
Corpus toy_corpus() {
  std::string text;
  for (int i = 0; i < 3; ++i) text += "6 0:3 1:3 2:3 3:3 8:1 9:1\n";
  for (int i = 0; i < 3; ++i) text += "6 4:3 5:3 6:3 7:3 8:1 9:1\n";
  return parse(text);
}

}  // namespace

TEST_CASE("initial guess from a partition") {
  const Corpus c = parse("2 0:3 1:1\n1 2:2\n");
  SUBCASE("single cluster") {
    const GuessState s = init_from_partition(c, make({0, 0, 0}));
    for (std::size_t d = 0; d < 2; ++d) CHECK(s.doc_distribution(d) == std::vector<double>{1.0});
  }
  SUBCASE("three words in A and one in B") {
    const GuessState s = init_from_partition(c, make({0, 1, 1}));
    CHECK(s.doc_distribution(0) == std::vector<double>{0.75, 0.25});
    CHECK(s.word_topic(0, 0) == 3);
    CHECK(s.word_topic(2, 1) == 2);
    CHECK(s.assigned_total() == c.total_length());
  }
}

TEST_CASE("binomial tail against direct summation") {
  for (int n : {1, 10, 50, 300}) {
    for (double p : {0.01, 0.1, 0.5, 0.9}) {
      for (int x = 0; x <= n; x += std::max(1, n / 17)) {
        const double oracle = binomial_tail_oracle(n, x, p);
        if (oracle < 1e-300) continue;
        CHECK(log_binomial_upper_tail(n, x, p) == doctest::Approx(std::log(oracle)).epsilon(1e-9));
      }
    }
  }
  CHECK(binomial_tail_oracle(10, 4, 0.1) == doctest::Approx(0.0128).epsilon(0.01));
  CHECK(binomial_tail_oracle(10, 6, 0.5) == doctest::Approx(0.377).epsilon(0.01));
  // Far tails stay finite in log space.
  CHECK(std::isfinite(log_binomial_upper_tail(5000, 5000, 0.01)));
}

TEST_CASE("most significant topic") {
  SUBCASE("all words from one topic") {
    const Corpus c = parse("1 0:4\n1 1:4\n");
    const GuessState s = init_from_partition(c, make({0, 1}));
    const std::vector<double> p{0.5, 0.5};
    CHECK(most_significant_topic(s, 0, p) == 0);
    CHECK(most_significant_topic(s, 1, p) == 1);
  }
  SUBCASE("rare topic beats frequent one") {
    const Corpus c = parse("2 0:6 1:4\n");
    const GuessState s = init_from_partition(c, make({0, 1}));
    const std::vector<double> p{0.5, 0.1};
    CHECK(most_significant_topic(s, 0, p) == 1);
  }
  SUBCASE("ties go to the lower id") {
    const Corpus c = parse("2 0:2 1:2\n");
    const GuessState s = init_from_partition(c, make({0, 1}));
    const std::vector<double> p{0.5, 0.5};
    CHECK(most_significant_topic(s, 0, p) == 0);
  }
  SUBCASE("document without topics") {
    const Corpus c = parse("1 0:1\n1 1:1\n");
    const GuessState s = init_from_partition(c, make({0, -1}));
    const std::vector<double> p{1.0};
    CHECK_THROWS_AS(most_significant_topic(s, 1, p), DataError);
  }
}

TEST_CASE("eta filter") {
  // Nine tokens of topic 0 and one of topic 1.
  const Corpus c = parse("2 0:9 1:1\n1 1:5\n");
  const GuessState s = init_from_partition(c, make({0, 1}));
  const std::vector<int> tau{0, 1};
  CHECK(eta_filter(c, s, 0.0, tau).assignment() == s.assignment());
  const GuessState f = eta_filter(c, s, 0.2, tau);
  CHECK(f.doc_distribution(0) == std::vector<double>{1.0, 0.0});
  CHECK(f.word_topic(1, 0) == 1);
  CHECK(f.word_topic(1, 1) == 5);
  CHECK(f.assigned_total() == c.total_length());
}

TEST_CASE("eta = 0.5 leaves only tau and topics at or above one half") {
  const auto gen = gen_dirichlet_corpus(DirichletSpec::equal_topics(10), 3);
  const ClusterResult cl = cluster(build_graph(gen.corpus), {.trials = 2});
  GuessState s = assign_orphans(gen.corpus, init_from_partition(gen.corpus, cl.partition));
  const auto tau = most_significant_topics(s, s.topic_marginal());
  const GuessState f = eta_filter(gen.corpus, s, 0.5, tau);
  for (std::size_t d = 0; d < f.num_docs(); ++d) {
    for (auto [t, x] : f.doc_topics(d)) {
      CHECK((t == tau[d] || 2 * x >= f.doc_length(d)));
    }
  }
}

TEST_CASE("plsa likelihood") {
  SUBCASE("one topic reduces to the unigram model") {
    const Corpus c = parse("2 0:3 1:1\n2 1:2 2:2\n1 0:1\n");
    const GuessState s = init_from_partition(c, make({0, 0, 0}));
    double expect = 0.0;
    const double l_c = static_cast<double>(c.total_length());
    for (WordId w = 0; w < 3; ++w) expect += c.word_total(w) * std::log(c.word_total(w) / l_c);
    for (const auto& d : c.docs()) expect += d.length() * std::log(d.length() / l_c);
    CHECK(plsa_loglik(c, s) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("two documents, two words") {
    const Corpus c = parse("2 0:2 1:1\n2 0:1 1:3\n");
    const GuessState s = init_from_partition(c, make({0, 1}));
    // p(0|t0) = 1, p(1|t1) = 1; p(t0|d0) = 2/3, p(t0|d1) = 1/4.
    const double expect = 2 * std::log(2.0 / 3) + std::log(1.0 / 3) + std::log(1.0 / 4) + 3 * std::log(3.0 / 4) +
                          3 * std::log(3.0 / 7) + 4 * std::log(4.0 / 7);
    CHECK(plsa_loglik(c, s) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("matches the dense oracle") {
    const auto gen = gen_dirichlet_corpus(DirichletSpec::equal_topics(10), 5);
    const ClusterResult cl = cluster(build_graph(gen.corpus), {.trials = 2});
    const GuessState s = assign_orphans(gen.corpus, init_from_partition(gen.corpus, cl.partition));
    CHECK(plsa_loglik(gen.corpus, s) == doctest::Approx(loglik_oracle(gen.corpus, s)).epsilon(1e-10));
  }
  SUBCASE("orphans must be assigned first") {
    const Corpus c = parse("2 0:1 1:1\n");
    CHECK_THROWS_AS(plsa_loglik(c, init_from_partition(c, make({0, -1}))), DataError);
  }
}

TEST_CASE("moving a cell off its true topic never raises the likelihood") {
  const Corpus c = toy_corpus();
  // Biology words and cells in topic 0, math in topic 1; the shared words
  // follow their document.
  std::vector<std::vector<int>> truth(6);
  for (std::size_t d = 0; d < 6; ++d) truth[d].assign(c.doc(d).entries().size(), d < 3 ? 0 : 1);
  const GuessState base(c, 2, truth);
  const double ll = plsa_loglik(c, base);
  for (std::size_t d = 0; d < 6; ++d) {
    for (std::size_t i = 0; i < truth[d].size(); ++i) {
      auto moved = truth;
      moved[d][i] = 1 - moved[d][i];
      CHECK(plsa_loglik(c, GuessState(c, 2, moved)) <= ll);
    }
  }
}

TEST_CASE("orphans join the dominant topic") {
  const Corpus c = toy_corpus();
  const Partition p = cluster(build_graph(c)).partition;
  CHECK(p.num_modules == 2);
  const GuessState s0 = init_from_partition(c, p);
  CHECK(s0.has_orphans());
  const GuessState s = assign_orphans(c, s0);
  CHECK_FALSE(s.has_orphans());
  CHECK(s.assigned_total() == c.total_length());
  for (std::size_t d = 0; d < 6; ++d) {
    CHECK(s.doc_topics(d).size() == 1);
    CHECK(s.doc_topics(d).front().first == p.module[d < 3 ? 0 : 4]);
  }
  CHECK(s.word_topics(8).size() == 2);
  SUBCASE("no orphans is the identity") {
    CHECK(assign_orphans(c, s).assignment() == s.assignment());
  }
}

TEST_CASE("documents made only of orphans go to the largest topic") {
  const Corpus c = parse("1 0:5\n1 1:2\n1 2:1\n");
  const GuessState s = assign_orphans(c, init_from_partition(c, make({0, 1, -1})));
  CHECK(s.assignment()[2] == std::vector<int>{0});
}

TEST_CASE("pruning") {
  // Topic 2 is present only inside documents dominated by other topics.
  const Corpus c = parse("2 0:8 2:1\n2 1:8 2:1\n1 0:5\n1 1:5\n");
  const GuessState s = init_from_partition(c, make({0, 1, 2}));
  const GuessState p0 = prune_small_topics(c, s, 0);
  CHECK(p0.num_topics() == 2);
  CHECK(p0.assigned_total() == c.total_length());
  CHECK(p0.assignment()[0] == std::vector<int>{0, 0});
  CHECK(p0.assignment()[1] == std::vector<int>{1, 1});
  const GuessState p2 = prune_small_topics(c, s, 2);
  CHECK(p2.num_topics() == 2);
  const GuessState p3 = prune_small_topics(c, s, 3);
  CHECK(p3.num_topics() == 1);
  CHECK(p3.assigned_total() == c.total_length());
  CHECK(p3.num_topics() <= p2.num_topics());
}

TEST_CASE("eta sweep") {
  const auto gen = gen_dirichlet_corpus(DirichletSpec::equal_topics(20), 7);
  const ClusterResult cl = cluster(build_graph(gen.corpus));
  const GuessState s0 = prune_small_topics(gen.corpus, assign_orphans(gen.corpus, init_from_partition(gen.corpus, cl.partition)), 0);
  const EtaSweepResult r = eta_sweep(gen.corpus, s0);
  CHECK(r.eta >= 0.0);
  CHECK(r.eta <= 0.5);
  CHECK(r.trace.size() == 51);
  CHECK(r.trace.front().second == doctest::Approx(plsa_loglik(gen.corpus, s0)));
  CHECK(r.loglik >= plsa_loglik(gen.corpus, s0));
  CHECK(r.state.assigned_total() == gen.corpus.total_length());
  const EtaSweepResult again = eta_sweep(gen.corpus, s0, 3);
  CHECK(again.state.assignment() == r.state.assignment());
  CHECK(again.loglik == r.loglik);
}

TEST_CASE("eta sweep keeps state0 when filtering only hurts") {
  // Every document is a single topic, so no filtering changes anything and
  // the sweep stays at eta = 0.
  const Corpus c = parse("1 0:3\n1 1:3\n");
  const GuessState s = init_from_partition(c, make({0, 1}));
  const EtaSweepResult r = eta_sweep(c, s);
  CHECK(r.eta == 0.0);
  CHECK(r.state.assignment() == s.assignment());
}

TEST_CASE("language corpus recovers one topic per language") {
  const auto gen = gen_language_corpus(LanguageSpec::egalitarian(50, 50, 1000), 4);
  const ClusterResult cl = cluster(build_graph(gen.corpus));
  const EtaSweepResult r = run_guess(gen.corpus, cl.partition);
  REQUIRE(r.state.num_topics() == 10);
  const TopicModel m = r.state.to_model();
  CHECK(m.valid());
  // Each topic's words lie in one language block and every document uses
  // exactly one topic.
  std::set<std::size_t> blocks;
  for (std::size_t t = 0; t < 10; ++t) {
    std::set<std::size_t> b;
    for (std::size_t w = 0; w < m.num_words; ++w) {
      if (m.beta_row(t)[w] > 0) b.insert(w / 50);
    }
    CHECK(b.size() == 1);
    blocks.insert(*b.begin());
  }
  CHECK(blocks.size() == 10);
  for (std::size_t d = 0; d < m.num_docs; ++d) CHECK(r.state.doc_topics(d).size() == 1);
}

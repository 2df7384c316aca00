#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "topicatlas/error.hpp"
#include "topicatlas/eval.hpp"
#include "topicatlas/guess.hpp"
#include "topicatlas/infer.hpp"
#include "topicatlas/mapclust.hpp"
#include "topicatlas/rng.hpp"
#include "topicatlas/syngen.hpp"
#include "topicatlas/wordgraph.hpp"

using namespace topicatlas;

namespace {

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_bagofwords(in);
}

Corpus random_corpus(Rng& rng, std::size_t docs, std::size_t n_w) {
  std::ostringstream text;
  for (std::size_t d = 0; d < docs; ++d) {
    std::set<std::size_t> words;
    const std::size_t u = 1 + rng.uniform_int(n_w);
    while (words.size() < u) words.insert(rng.uniform_int(n_w));
    text << words.size();
    for (std::size_t w : words) text << ' ' << w << ':' << 1 + rng.uniform_int(4);
    text << '\n';
  }
  std::istringstream in(text.str());
  return parse_bagofwords(in, Vocabulary{n_w, {}});
}

double unigram_loglik(const Corpus& c) {
  const double l_c = static_cast<double>(c.total_length());
  double ll = 0.0;
  for (std::size_t w = 0; w < c.vocab_size(); ++w) {
    const double n = static_cast<double>(c.word_total(static_cast<WordId>(w)));
    if (n > 0) ll += n * std::log(n / l_c);
  }
  return ll;
}

bool monotone(const std::vector<double>& trace, double rel = 1e-8) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] < trace[i - 1] - rel * std::abs(trace[i - 1])) return false;
  }
  return true;
}

std::string serialized(const TopicModel& m) {
  std::ostringstream out;
  write_model(m, out);
  return out.str();
}

}  // namespace

TEST_CASE("K = 1 collapses to the unigram model") {
  Rng rng(1, 0);
  const Corpus c = random_corpus(rng, 30, 12);
  const double l_c = static_cast<double>(c.total_length());

  const FitResult lda = lda_fit(c, 1);
  const FitResult plsa = plsa_fit(c, 1);
  for (std::size_t w = 0; w < c.vocab_size(); ++w) {
    const double f = static_cast<double>(c.word_total(static_cast<WordId>(w))) / l_c;
    CHECK(lda.model.beta[w] == doctest::Approx(f).epsilon(1e-6));
    CHECK(plsa.model.beta[w] == doctest::Approx(f).epsilon(1e-6));
  }
  // With one topic the bound is exact: the unigram likelihood.
  CHECK(lda.trace.back() == doctest::Approx(unigram_loglik(c)).epsilon(1e-6));

  // PLSA adds the document-choice term, matching the guess likelihood.
  const GuessState one(c, 1, [&] {
    std::vector<std::vector<int>> a(c.num_docs());
    for (std::size_t d = 0; d < c.num_docs(); ++d) a[d].assign(c.doc(d).entries().size(), 0);
    return a;
  }());
  CHECK(plsa.trace.back() == doctest::Approx(plsa_loglik(c, one)).epsilon(1e-9));
  CHECK(plsa.model.alpha == std::vector<double>{1.0});
}

TEST_CASE("EM traces are monotone on random corpora") {
  Rng rng(2, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Corpus c = random_corpus(rng, 10 + rng.uniform_int(20), 5 + rng.uniform_int(15));
    const std::size_t k = 2 + rng.uniform_int(3);
    FitOptions opts;
    opts.seed = static_cast<std::uint64_t>(rep);
    opts.max_iters = 40;
    opts.fixed_iterations = true;
    const FitResult p = plsa_fit(c, k, opts);
    CHECK(monotone(p.trace));
    opts.alpha_mode = AlphaMode::Fixed;
    CHECK(monotone(lda_fit(c, k, opts).trace));
  }
}

TEST_CASE("LDA trace is monotone on a generated corpus with alpha updates") {
  auto spec = DirichletSpec::equal_topics(5);
  spec.num_docs = 200;
  spec.num_words = 300;
  const auto g = gen_dirichlet_corpus(spec, 3);
  FitOptions opts;
  opts.max_iters = 40;
  opts.fixed_iterations = true;
  const FitResult r = lda_fit(g.corpus, 5, opts);
  CHECK(r.trace.size() == 40);
  CHECK(monotone(r.trace));
  opts.alpha_mode = AlphaMode::Asymmetric;
  CHECK(monotone(lda_fit(g.corpus, 5, opts).trace));
}

TEST_CASE("fits do not depend on the thread count") {
  const auto g = gen_language_corpus(LanguageSpec::egalitarian(100, 20, 1200), 1);
  FitOptions a, b;
  a.max_iters = b.max_iters = 5;
  a.threads = 1;
  b.threads = 4;
  CHECK(serialized(lda_fit(g.corpus, 10, a).model) == serialized(lda_fit(g.corpus, 10, b).model));
  CHECK(serialized(plsa_fit(g.corpus, 10, a).model) == serialized(plsa_fit(g.corpus, 10, b).model));
  const auto f1 = fold_in(g.truth, g.corpus, 20, 1e-6, 1);
  const auto f4 = fold_in(g.truth, g.corpus, 20, 1e-6, 4);
  CHECK(f1 == f4);
}

TEST_CASE("seeded initialization") {
  const Corpus c = parse("2 0:3 1:1\n1 2:2\n2 1:1 3:1\n1 0:5\n");
  SUBCASE("K = D = 1 gives the smoothed document") {
    const Corpus one = c.subset({0});
    const TopicModel m = seeded_init(one, 1, 1);
    CHECK(m.beta[0] == doctest::Approx(4.0 / 8.0));
    CHECK(m.beta[1] == doctest::Approx(2.0 / 8.0));
    CHECK(m.beta[2] == doctest::Approx(1.0 / 8.0));
  }
  SUBCASE("seeds are distinct documents") {
    const TopicModel m = seeded_init(c, 4, 9);
    std::set<std::vector<double>> rows;
    for (std::size_t t = 0; t < 4; ++t) rows.insert({m.beta_row(t).begin(), m.beta_row(t).end()});
    CHECK(rows.size() == 4);
    for (double b : m.beta) CHECK(b > 0.0);
    CHECK(m.valid());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(seeded_init(c, 5, 1), ConfigError);
    CHECK_THROWS_AS(seeded_init(c, 0, 1), ConfigError);
  }
  SUBCASE("ten distinct seeds on a larger corpus") {
    const auto g = gen_language_corpus(LanguageSpec::egalitarian(100, 20, 50), 2);
    const TopicModel m = seeded_init(g.corpus, 10, 3);
    std::set<std::vector<double>> rows;
    for (std::size_t t = 0; t < 10; ++t) rows.insert({m.beta_row(t).begin(), m.beta_row(t).end()});
    CHECK(rows.size() == 10);
  }
}

TEST_CASE("option validation") {
  const Corpus c = parse("1 0:1\n");
  FitOptions o;
  o.tolerance = 0.0;
  CHECK_THROWS_AS(lda_fit(c, 1, o), ConfigError);
  o = {};
  o.init = InitMode::FromModel;
  CHECK_THROWS_AS(plsa_fit(c, 1, o), ConfigError);
  CHECK_THROWS_AS(lda_fit(c, 0), ConfigError);
  CHECK(parse_init_mode("seeded") == InitMode::Seeded);
  CHECK_THROWS_AS(parse_init_mode("kmeans"), ConfigError);
}

TEST_CASE("planted disjoint topics are a PLSA fixed point") {
  const auto g = gen_language_corpus(LanguageSpec::uniform({0.5, 0.5}, 20, 15, 60), 4);
  FitOptions o;
  o.init = InitMode::FromModel;
  o.init_model = g.truth;
  o.max_iters = 5;
  const FitResult r = plsa_fit(g.corpus, 2, o);
  // Truth's word frequencies are the empirical ones only in expectation, so
  // compare with the empirical per-language frequencies instead.
  for (std::size_t d = 0; d < g.corpus.num_docs(); ++d) {
    for (std::size_t t = 0; t < 2; ++t) CHECK(r.model.theta_row(d)[t] == doctest::Approx(g.truth.theta_row(d)[t]).epsilon(1e-6));
  }
  CHECK(r.trace.front() <= r.trace.back());
  CHECK(r.trace.back() - r.trace[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("from-model start on the truth stays at the truth") {
  const auto g = gen_language_corpus(LanguageSpec::egalitarian(200, 50, 300), 5);
  FitOptions o;
  o.init = InitMode::FromModel;
  o.init_model = g.truth;
  o.init_model->alpha.assign(10, 0.01);
  const FitResult r = lda_fit(g.corpus, 10, o);
  CHECK(r.converged);
  CHECK(r.iterations < lda_fit(g.corpus, 10).iterations);
  // The topics settle after one step; what follows is alpha drifting.
  CHECK(std::abs(r.trace[1] - r.trace.back()) < 1e-3 * std::abs(r.trace.back()));
  CHECK(bm_normalized(r.model, g.truth, g.corpus).bm_n > 0.99);
}

TEST_CASE("refinement of the guess") {
  const auto g = gen_language_corpus(LanguageSpec::egalitarian(300, 50, 300), 6);
  const auto graph = build_graph(g.corpus);
  const auto cl = cluster(graph, {.trials = 2, .seed = 1});
  const auto guess = run_guess(g.corpus, cl.partition);
  const FitResult r = refine_with_lda(guess.state, g.corpus);
  REQUIRE_FALSE(r.checkpoints.empty());
  CHECK(r.checkpoints.front().first == 1);
  CHECK(r.checkpoints.back().first == r.iterations);
  CHECK(r.checkpoints.back().second == r.model);
  for (std::size_t i = 1; i < r.checkpoints.size(); ++i) CHECK(r.checkpoints[i].first > r.checkpoints[i - 1].first);
  CHECK(bm_normalized(guess.state.to_model(), r.model, g.corpus).bm_n > 0.99);
  CHECK(r.model.alpha.size() == guess.state.num_topics());
  CHECK(r.model.valid());
  CHECK(guess.state.to_model().alpha == std::vector<double>(guess.state.num_topics(), 0.01));
}

TEST_CASE("model files") {
  auto spec = DirichletSpec::equal_topics(4);
  spec.num_docs = 40;
  spec.num_words = 60;
  const auto g = gen_dirichlet_corpus(spec, 7);
  const FitResult r = lda_fit(g.corpus, 4, {.max_iters = 5});
  const std::string text = serialized(r.model);
  std::istringstream in(text);
  const TopicModel back = read_model(in);
  CHECK(back == r.model);
  CHECK(serialized(back) == text);

  const auto path = std::filesystem::temp_directory_path() / "topicatlas_test_model.txt";
  save_model(r.model, path);
  CHECK(load_model(path) == r.model);
  std::filesystem::remove(path);

  const FitResult one = lda_fit(g.corpus, 1, {.max_iters = 3});
  const std::string t1 = serialized(one.model);
  CHECK(static_cast<std::size_t>(std::count(t1.begin(), t1.end(), '\n')) == 4 + g.corpus.num_docs());
}

TEST_CASE("fold-in rows are distributions") {
  const auto g = gen_language_corpus(LanguageSpec::egalitarian(100, 30, 50), 8);
  const auto theta = fold_in(g.truth, g.corpus);
  for (std::size_t d = 0; d < g.corpus.num_docs(); ++d) {
    double s = 0.0;
    std::size_t top = 0;
    for (std::size_t t = 0; t < 10; ++t) {
      s += theta[d * 10 + t];
      if (theta[d * 10 + t] > theta[d * 10 + top]) top = t;
    }
    CHECK(s == doctest::Approx(1.0));
    CHECK(g.truth.theta_row(d)[top] == 1.0);
  }
}

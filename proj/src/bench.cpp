#include "topicatlas/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "topicatlas/error.hpp"
#include "topicatlas/eval.hpp"
#include "topicatlas/landscape.hpp"
#include "topicatlas/pipeline.hpp"
#include "topicatlas/syngen.hpp"

namespace topicatlas {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string num(std::size_t v) { return std::to_string(v); }

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den > 0 ? (n * sxy - sx * sy) / den : 0.0;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct EngineRun {
  TopicModel model;
  double seconds = 0.0;
};

// Engines: topicmap, lda or lda-random, lda-seeded, plsa.
EngineRun run_engine(const std::string& engine, const Corpus& corpus, std::size_t k, std::uint64_t seed,
                     const BenchmarkOptions& opts) {
  const auto t0 = Clock::now();
  EngineRun r;
  if (engine == "topicmap") {
    TopicMapOptions o;
    o.seed = seed;
    o.trials = opts.trials;
    o.threads = opts.threads;
    r.model = run_topicmap(corpus, o).model();
  } else {
    FitOptions fo;
    fo.seed = seed;
    fo.threads = opts.threads;
    if (engine == "lda-seeded") fo.init = InitMode::Seeded;
    r.model = (engine == "plsa" ? plsa_fit(corpus, k, fo) : lda_fit(corpus, k, fo)).model;
  }
  r.seconds = since(t0);
  return r;
}

struct Summary {
  std::vector<double> accuracy;
  double reproducibility = 0.0;
  double seconds = 0.0;
  double topics = 0.0;
};

Summary summarize(const std::vector<EngineRun>& runs, const TopicModel& truth, const Corpus& corpus) {
  Summary s;
  std::vector<double> secs, ks, rep;
  for (const auto& r : runs) {
    s.accuracy.push_back(bm_normalized(r.model, truth, corpus).bm_n);
    secs.push_back(r.seconds);
    ks.push_back(static_cast<double>(r.model.num_topics));
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) rep.push_back(bm_normalized(runs[i].model, runs[j].model, corpus).bm_n);
  }
  s.reproducibility = rep.empty() ? 1.0 : mean(rep);
  s.seconds = mean(secs);
  s.topics = mean(ks);
  return s;
}

std::vector<EngineRun> repeat(const std::string& engine, const Corpus& corpus, std::size_t k,
                              const BenchmarkOptions& opts) {
  std::vector<EngineRun> runs;
  for (std::size_t r = 0; r < opts.runs; ++r) runs.push_back(run_engine(engine, corpus, k, opts.seed + r, opts));
  return runs;
}

Table language_sweep(const BenchmarkOptions& opts) {
  Table t;
  t.columns = {"corpus", "docs", "engine", "runs", "accuracy_mean", "accuracy_median", "reproducibility",
               "topics_mean", "seconds_mean"};
  const std::vector<std::string> engines{"topicmap", "lda-random", "lda-seeded", "plsa"};
  for (const std::string corpus_name : {"egalitarian", "oligarchic"}) {
    for (std::size_t d : opts.doc_counts) {
      const LanguageSpec spec = corpus_name == std::string("egalitarian") ? LanguageSpec::egalitarian(1000, 100, d)
                                                                        : LanguageSpec::oligarchic(1000, 100, d);
      const GeneratedCorpus g = gen_language_corpus(spec, opts.seed);
      for (const auto& e : engines) {
        const Summary s = summarize(repeat(e, g.corpus, 10, opts), g.truth, g.corpus);
        t.add({corpus_name, num(d), e, num(opts.runs), num(mean(s.accuracy)), num(median(s.accuracy)),
               num(s.reproducibility), num(s.topics), num(s.seconds)});
      }
    }
  }
  return t;
}

Table dirichlet_grid(const BenchmarkOptions& opts) {
  Table t;
  t.columns = {"alpha", "generic_fraction", "engine", "runs", "accuracy_mean", "accuracy_median", "reproducibility",
               "topics_mean", "seconds_mean"};
  for (double alpha : opts.alphas) {
    for (double gf : opts.generic_fractions) {
      DirichletSpec spec = DirichletSpec::equal_topics(20);
      spec.alpha = alpha;
      spec.generic_fraction = gf;
      const GeneratedCorpus g = gen_dirichlet_corpus(spec, opts.seed);
      for (const std::string e : {"topicmap", "lda", "plsa"}) {
        const Summary s = summarize(repeat(e, g.corpus, 20, opts), g.truth, g.corpus);
        t.add({num(alpha), num(gf), e, num(opts.runs), num(mean(s.accuracy)), num(median(s.accuracy)),
               num(s.reproducibility), num(s.topics), num(s.seconds)});
      }
    }
  }
  return t;
}

Table heldout_table(const BenchmarkOptions& opts) {
  Table t;
  t.columns = {"k", "heldout_loglik", "perplexity", "effective_topics", "error"};
  const GeneratedCorpus g = gen_language_corpus(LanguageSpec::egalitarian(1000, 100, 1000), opts.seed);
  ScanOptions so;
  so.seed = opts.seed;
  so.fit.seed = opts.seed;
  so.fit.threads = opts.threads;
  for (const ScanPoint& p : heldout_scan(g.corpus, opts.k_list, Engine::Lda, so)) {
    t.add({num(p.k), num(p.heldout_loglik), num(p.perplexity), num(p.effective_topics), p.error});
  }
  return t;
}

Table gain_table(const BenchmarkOptions& opts) {
  Table t;
  t.columns = {"doc_length", "num_words", "ratio", "gain", "a", "threshold", "ln2_squared", "one_over_pi"};
  const std::size_t n_w = 1000;
  const std::vector<std::size_t> lengths{2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
  for (const GainPoint& p : gain_curve(n_w, lengths, opts.threads)) {
    t.add({num(p.doc_length), num(p.num_words), num(static_cast<double>(p.doc_length) / static_cast<double>(n_w)),
           num(p.best.gain), num(p.best.a), num(p.best.threshold), num(std::numbers::ln2 * std::numbers::ln2),
           num(1.0 / std::numbers::pi)});
  }
  return t;
}

ScalingRow time_topicmap(const Corpus& corpus, std::size_t docs, std::size_t k) {
  TopicMapOptions o;
  o.refine = false;
  o.threads = 1;
  const TopicMapResult r = run_topicmap(corpus, o);
  return {"topicmap", docs, k, r.seconds.guess_total(), r.seconds.graph, r.seconds.cluster, r.seconds.guess};
}

ScalingRow time_lda(const Corpus& corpus, std::size_t docs, std::size_t k, const ScalingOptions& opts) {
  FitOptions fo;
  fo.max_iters = opts.lda_iters;
  fo.fixed_iterations = true;
  fo.var_max_iters = opts.lda_var_iters;
  // Never met, so every document runs all variational steps.
  fo.var_tolerance = 1e-300;
  fo.threads = 1;
  fo.seed = opts.seed;
  const auto t0 = Clock::now();
  lda_fit(corpus, k, fo);
  return {"lda", docs, k, since(t0), 0.0, 0.0, 0.0};
}

}  // namespace

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw ConfigError("table row has the wrong number of fields");
  rows.push_back(std::move(row));
}

void Table::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

ScalingReport measure_scaling(const ScalingOptions& opts) {
  if (opts.doc_counts.empty() && opts.topic_counts.empty()) throw ConfigError("scaling grid is empty");
  // (D, K) pairs: D sweep at base K, K sweep at base D, without duplicates.
  std::vector<std::pair<std::size_t, std::size_t>> grid;
  for (std::size_t d : opts.doc_counts) grid.emplace_back(d, opts.base_topics);
  for (std::size_t k : opts.topic_counts) {
    if (std::find(grid.begin(), grid.end(), std::make_pair(opts.base_docs, k)) == grid.end()) {
      grid.emplace_back(opts.base_docs, k);
    }
  }
  ScalingReport rep;
  for (const auto& [d, k] : grid) {
    DirichletSpec spec = DirichletSpec::equal_topics(k);
    spec.num_docs = d;
    spec.doc_length = opts.doc_length;
    spec.num_words = opts.num_words;
    spec.alpha = opts.alpha;
    spec.generic_fraction = opts.generic_fraction;
    const GeneratedCorpus g = gen_dirichlet_corpus(spec, opts.seed);
    ScalingRow tm, lda;
    for (std::size_t r = 0; r < std::max<std::size_t>(opts.repeats, 1); ++r) {
      const ScalingRow a = time_topicmap(g.corpus, d, k);
      const ScalingRow b = time_lda(g.corpus, d, k, opts);
      if (r == 0 || a.seconds < tm.seconds) tm = a;
      if (r == 0 || b.seconds < lda.seconds) lda = b;
    }
    rep.rows.push_back(tm);
    rep.rows.push_back(lda);
  }
  for (const std::string engine : {"topicmap", "lda"}) {
    std::vector<double> x, y;
    for (const auto& r : rep.rows) {
      if (r.engine == engine && r.topics == opts.base_topics) {
        x.push_back(static_cast<double>(r.docs));
        y.push_back(r.seconds);
      }
    }
    (engine == "lda" ? rep.lda_slope : rep.topicmap_slope) = slope(x, y);
  }
  return rep;
}

Table scaling_table(const ScalingReport& report) {
  Table t;
  t.columns = {"engine", "docs", "topics", "seconds", "graph_seconds", "cluster_seconds", "guess_seconds",
               "slope_seconds_per_doc"};
  for (const auto& r : report.rows) {
    t.add({r.engine, num(r.docs), num(r.topics), num(r.seconds), num(r.graph_seconds), num(r.cluster_seconds),
           num(r.guess_seconds), num(r.engine == "lda" ? report.lda_slope : report.topicmap_slope)});
  }
  return t;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig2", "fig4", "figS5", "figS2", "scaling"};
  return names;
}

Table run_preset(const std::string& name, const BenchmarkOptions& opts) {
  if (opts.runs < 1) throw ConfigError("benchmark needs at least one run");
  if (name == "fig2") return language_sweep(opts);
  if (name == "fig4") return dirichlet_grid(opts);
  if (name == "figS5") return heldout_table(opts);
  if (name == "figS2") return gain_table(opts);
  if (name == "scaling") {
    ScalingOptions so;
    so.seed = opts.seed;
    return scaling_table(measure_scaling(so));
  }
  throw ConfigError("unknown benchmark preset '" + name + "'");
}

}  // namespace topicatlas

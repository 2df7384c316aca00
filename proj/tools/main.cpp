// topicatlas command-line entry point.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
// failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "topicatlas/bench.hpp"
#include "topicatlas/corpus.hpp"
#include "topicatlas/error.hpp"
#include "topicatlas/eval.hpp"
#include "topicatlas/landscape.hpp"
#include "topicatlas/parallel.hpp"
#include "topicatlas/pipeline.hpp"
#include "topicatlas/syngen.hpp"

namespace fs = std::filesystem;
using namespace topicatlas;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string command_line;
  std::string input;
  std::string output;
  std::string engine = "topicmap";
  std::size_t k = 0;
  double p_value = 0.05;
  std::size_t min_topic_docs = 0;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::size_t checkpoint_every = 5;
  std::vector<std::string> presets;

  // generate
  std::string spec_file;
  std::size_t docs = 0;
  double alpha = -1.0;
  double generic_fraction = -1.0;

  // fit
  std::string init = "random";
  std::size_t max_iters = 100;
  std::string vocab;

  // eval
  std::vector<std::string> models;
  std::string truth;
  std::string heldout;
  std::string runs_dir;
  std::size_t shuffles = 20;

  // landscape
  std::string grid = "gain";
  std::size_t doc_length = 10;
  std::size_t num_words = 20;

  // benchmark
  std::size_t runs = 3;
};

// Rethrows a library error with the stage name prefixed, keeping its type.
template <typename F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(stage + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(stage + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(stage + ": " + e.what());
  }
}

class Manifest {
 public:
  explicit Manifest(const RunConfig& cfg, std::string subcommand) {
    set("subcommand", std::move(subcommand));
    set("version", kVersion);
    set("rng", "splitmix64 counter (seed, stream)");
    set("command", cfg.command_line);
    set("seed", std::to_string(cfg.seed));
    set("threads", std::to_string(resolve_threads(cfg.threads)));
  }
  void set(const std::string& key, std::string value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = std::move(value);
  }
  void file(const std::string& role, const fs::path& path) { set("file." + role, path.filename().string()); }
  void save(const fs::path& dir) const {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw DataError("cannot write manifest in " + dir.string());
    for (const auto& k : order_) out << k << '=' << values_.at(k) << '\n';
  }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

fs::path prepare_output(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--output is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
  return dir;
}

void require_file(const std::string& path, const std::string& flag) {
  if (path.empty()) throw ConfigError(flag + " is required");
  if (!fs::is_regular_file(path)) throw ConfigError(flag + ": no such file " + path);
}

Corpus load_input(const RunConfig& cfg) {
  require_file(cfg.input, "--input");
  std::optional<fs::path> vocab;
  if (!cfg.vocab.empty()) {
    require_file(cfg.vocab, "--vocab");
    vocab = cfg.vocab;
  }
  return staged("load corpus", [&] { return load_bagofwords(cfg.input, vocab); });
}

// ---- generate ----------------------------------------------------------

int cmd_generate(const RunConfig& cfg) {
  if (cfg.presets.size() > 1) throw ConfigError("generate takes one --preset");
  if (cfg.presets.empty() == cfg.spec_file.empty()) throw ConfigError("generate needs exactly one of --preset or --spec");
  const fs::path out = prepare_output(cfg.output);
  Manifest m(cfg, "generate");

  GeneratedCorpus g;
  std::uint64_t seed = cfg.seed;
  std::ostringstream echo;
  auto language = [&](LanguageSpec spec) {
    echo << "model=language K=" << spec.num_languages() << " D=" << spec.num_docs << " L_d=" << spec.doc_length;
    g = staged("generate", [&] { return gen_language_corpus(spec, seed); });
  };
  auto dirichlet = [&](DirichletSpec spec) {
    if (cfg.alpha > 0.0) spec.alpha = cfg.alpha;
    if (cfg.generic_fraction >= 0.0) spec.generic_fraction = cfg.generic_fraction;
    if (cfg.docs > 0) spec.num_docs = cfg.docs;
    echo << "model=dirichlet K=" << spec.num_topics() << " D=" << spec.num_docs << " L_d=" << spec.doc_length
         << " N_w=" << spec.num_words << " alpha=" << fmt(spec.alpha) << " generic_fraction=" << fmt(spec.generic_fraction);
    g = staged("generate", [&] { return gen_dirichlet_corpus(spec, seed); });
  };

  if (!cfg.spec_file.empty()) {
    require_file(cfg.spec_file, "--spec");
    const SpecFile sf = staged("spec file", [&] { return SpecFile::load(cfg.spec_file); });
    if (sf.has("seed")) seed = sf.get_size("seed");
    const std::string model = sf.get_or("model", "dirichlet");
    m.set("spec_file", fs::absolute(cfg.spec_file).string());
    if (model == "language") {
      language(staged("spec file", [&] { return language_spec_from(sf, fs::path(cfg.spec_file).parent_path()); }));
    } else if (model == "dirichlet") {
      dirichlet(staged("spec file", [&] { return dirichlet_spec_from(sf); }));
    } else {
      throw ConfigError("spec file: unknown model '" + model + "'");
    }
  } else {
    const std::string& p = cfg.presets.front();
    const std::size_t d = cfg.docs > 0 ? cfg.docs : 1000;
    m.set("preset", p);
    if (p == "egalitarian10") {
      language(LanguageSpec::egalitarian(1000, 100, d));
    } else if (p == "oligarchic") {
      language(LanguageSpec::oligarchic(1000, 100, d));
    } else if (p == "fig4-equal") {
      dirichlet(DirichletSpec::equal_topics(20));
    } else if (p == "fig4-unequal") {
      dirichlet(DirichletSpec::unequal_topics());
    } else {
      throw ConfigError("unknown generate preset '" + p + "' (egalitarian10, oligarchic, fig4-equal, fig4-unequal)");
    }
  }
  m.set("seed", std::to_string(seed));
  m.set("spec", echo.str());
  save_bagofwords(g.corpus, out / "corpus.txt");
  save_model(g.truth, out / "truth.model");
  m.file("corpus", out / "corpus.txt");
  m.file("truth", out / "truth.model");
  m.set("docs", std::to_string(g.corpus.num_docs()));
  m.set("vocab_size", std::to_string(g.corpus.vocab_size()));
  m.save(out);
  std::cout << "wrote " << g.corpus.num_docs() << " documents to " << (out / "corpus.txt").string() << '\n';
  return 0;
}

// ---- fit ---------------------------------------------------------------

FitOptions fit_options(const RunConfig& cfg) {
  FitOptions fo;
  fo.init = parse_init_mode(cfg.init);
  fo.seed = cfg.seed;
  fo.threads = cfg.threads;
  fo.max_iters = cfg.max_iters;
  return fo;
}

int cmd_fit(const RunConfig& cfg) {
  const Engine engine = parse_engine(cfg.engine);
  if (engine != Engine::TopicMap && cfg.k == 0) throw ConfigError("--k is required for engine " + cfg.engine);
  if (!(cfg.p_value > 0.0 && cfg.p_value < 1.0)) throw ConfigError("--p-value must lie in (0, 1)");
  const Corpus corpus = load_input(cfg);
  const fs::path out = prepare_output(cfg.output);
  Manifest m(cfg, "fit");
  m.set("input", fs::absolute(cfg.input).string());
  m.set("engine", to_string(engine));
  m.set("max_iters", std::to_string(cfg.max_iters));

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> warnings;
  if (engine == Engine::TopicMap) {
    TopicMapOptions o;
    o.p_value = cfg.p_value;
    o.trials = cfg.trials;
    o.seed = cfg.seed;
    o.min_topic_docs = cfg.min_topic_docs;
    o.threads = cfg.threads;
    o.refine_opts = fit_options(cfg);
    o.refine_opts.checkpoint_every = cfg.checkpoint_every;
    const TopicMapResult r = staged("topicmap", [&] { return run_topicmap(corpus, o); });
    save_partition(r.clusters.partition, out / "partition.txt");
    save_model(r.guess.state.to_model(), out / "guess.model");
    fs::create_directories(out / "checkpoints");
    for (const auto& [iter, model] : r.refined->checkpoints) {
      save_model(model, out / "checkpoints" / ("iter_" + std::to_string(iter) + ".model"));
    }
    save_model(r.refined->model, out / "model.txt");
    save_trace(r.refined->trace, out / "trace.csv");
    warnings = r.refined->warnings;
    m.set("p_value", fmt(cfg.p_value));
    m.set("trials", std::to_string(cfg.trials));
    m.set("min_topic_docs", std::to_string(cfg.min_topic_docs));
    m.set("checkpoint_every", std::to_string(cfg.checkpoint_every));
    m.set("graph_edges", std::to_string(r.graph_edges));
    m.set("codelength", fmt(r.clusters.codelength));
    m.set("clusters", std::to_string(r.clusters.partition.num_modules));
    m.set("eta", fmt(r.guess.eta));
    m.set("topics", std::to_string(r.guess.state.num_topics()));
    m.set("iterations", std::to_string(r.refined->iterations));
    m.set("seconds.graph", fmt(r.seconds.graph));
    m.set("seconds.cluster", fmt(r.seconds.cluster));
    m.set("seconds.guess", fmt(r.seconds.guess));
    m.set("seconds.refine", fmt(r.seconds.refine));
    m.file("partition", out / "partition.txt");
    m.file("guess", out / "guess.model");
    std::cout << "topicmap: " << r.guess.state.num_topics() << " topics, eta " << fmt(r.guess.eta) << ", "
              << r.refined->iterations << " LDA iterations\n";
  } else {
    const FitOptions fo = fit_options(cfg);
    const FitResult r = staged(cfg.engine, [&] { return fit_baseline(corpus, engine, cfg.k, fo); });
    save_model(r.model, out / "model.txt");
    save_trace(r.trace, out / "trace.csv");
    warnings = r.warnings;
    m.set("k", std::to_string(cfg.k));
    m.set("init", to_string(fo.init));
    m.set("iterations", std::to_string(r.iterations));
    m.set("converged", r.converged ? "1" : "0");
    std::cout << cfg.engine << ": " << r.iterations << " iterations" << (r.converged ? "" : " (not converged)") << '\n';
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  m.set("seconds", fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
  m.file("model", out / "model.txt");
  m.file("trace", out / "trace.csv");
  m.save(out);
  return 0;
}

// ---- eval --------------------------------------------------------------

TopicModel load_checked(const std::string& path, const Corpus& corpus) {
  require_file(path, "model");
  TopicModel m = staged("load model", [&] { return load_model(path); });
  if (m.num_docs != corpus.num_docs() || m.num_words != corpus.vocab_size()) {
    throw DataError("model " + path + " does not match the corpus (" + std::to_string(m.num_docs) + " docs, " +
                    std::to_string(m.num_words) + " words)");
  }
  return m;
}

int cmd_eval(const RunConfig& cfg) {
  const Corpus corpus = load_input(cfg);
  const fs::path out = prepare_output(cfg.output);
  Manifest m(cfg, "eval");
  m.set("input", fs::absolute(cfg.input).string());
  m.set("shuffles", std::to_string(cfg.shuffles));

  std::vector<std::string> paths = cfg.models;
  if (!cfg.runs_dir.empty()) {
    if (!fs::is_directory(cfg.runs_dir)) throw ConfigError("--runs: no such directory " + cfg.runs_dir);
    std::vector<std::string> found;
    for (const auto& e : fs::recursive_directory_iterator(cfg.runs_dir)) {
      if (e.is_regular_file() && e.path().filename() == "model.txt") found.push_back(e.path().string());
    }
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) throw ConfigError("eval needs --model or --runs");
  std::vector<TopicModel> models;
  for (const auto& p : paths) models.push_back(load_checked(p, corpus));
  std::optional<TopicModel> truth;
  if (!cfg.truth.empty()) truth = load_checked(cfg.truth, corpus);
  std::optional<Corpus> heldout;
  if (!cfg.heldout.empty()) {
    require_file(cfg.heldout, "--heldout");
    heldout = staged("load held-out corpus", [&] {
      std::ifstream in(cfg.heldout);
      return parse_bagofwords(in, Vocabulary{corpus.vocab_size(), {}});
    });
  }

  // One report per model: accuracy against the truth, perplexity, topics.
  std::ofstream csv(out / "models.csv");
  csv << "model," << EvalReport::csv_header() << '\n';
  std::ofstream txt(out / "report.txt");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    EvalReport r;
    r.num_topics = models[i].num_topics;
    r.effective_topics = effective_topics(models[i].p_topic);
    if (truth) {
      r.doc_match = staged("eval", [&] { return bm_normalized(models[i], *truth, corpus, cfg.shuffles, cfg.seed); });
      r.word_match = staged("eval", [&] { return bm_normalized_words(models[i], *truth, cfg.shuffles, cfg.seed); });
    }
    if (heldout) {
      r.perplexity = staged("perplexity", [&] { return perplexity(models[i], *heldout, cfg.threads); });
      r.heldout_loglik = -std::log(*r.perplexity);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    csv << paths[i] << ',' << r.csv_row() << '\n';
    txt << "[" << paths[i] << "]\n";
    r.write(txt);
  }
  // Reproducibility: one row per pair of models.
  std::ofstream pairs(out / "pairs.csv");
  pairs << "model_a,model_b,bm_forward,bm_backward,bm,bm_rand,bm_n,degenerate\n";
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = i + 1; j < models.size(); ++j) {
      const auto r = staged("eval", [&] { return bm_normalized(models[i], models[j], corpus, cfg.shuffles, cfg.seed); });
      pairs << paths[i] << ',' << paths[j] << ',' << fmt(r.match.forward) << ',' << fmt(r.match.backward) << ','
            << fmt(r.match.bm) << ',' << fmt(r.bm_rand) << ',' << fmt(r.bm_n) << ',' << (r.degenerate ? 1 : 0) << '\n';
    }
  }
  m.set("models", std::to_string(models.size()));
  m.file("models_csv", out / "models.csv");
  m.file("pairs_csv", out / "pairs.csv");
  m.file("report", out / "report.txt");
  m.save(out);
  std::cout << "evaluated " << models.size() << " model(s)\n";
  return 0;
}

// ---- landscape ---------------------------------------------------------

int cmd_landscape(const RunConfig& cfg) {
  const fs::path out = prepare_output(cfg.output);
  Manifest m(cfg, "landscape");
  m.set("grid", cfg.grid);
  Table t;
  if (cfg.grid == "gain") {
    // Gain against L_d / N_w for the given N_w.
    t.columns = {"doc_length", "num_words", "ratio", "gain", "a", "threshold"};
    std::vector<std::size_t> lengths;
    for (double l = 2; l <= 100.0 * static_cast<double>(cfg.num_words); l *= 1.5) {
      const auto v = static_cast<std::size_t>(std::llround(l));
      if (lengths.empty() || lengths.back() != v) lengths.push_back(v);
    }
    for (const auto& p : staged("landscape", [&] { return gain_curve(cfg.num_words, lengths, cfg.threads); })) {
      t.add({std::to_string(p.doc_length), std::to_string(p.num_words),
             fmt(static_cast<double>(p.doc_length) / static_cast<double>(p.num_words)), fmt(p.best.gain),
             std::to_string(p.best.a), std::to_string(p.best.threshold)});
    }
  } else if (cfg.grid == "phase") {
    // Symmetric and asymmetric gaps against f_E with f_U = 1 - f_E.
    t.columns = {"f_e", "f_u", "symmetric_gap", "asymmetric_gap"};
    const double c = staged("landscape", [&] { return overfit_gain(cfg.doc_length, cfg.num_words).gain; });
    for (int i = 0; i <= 100; ++i) {
      const LanguageParams p{cfg.doc_length, cfg.num_words, 3, i / 100.0, 1.0 - i / 100.0};
      t.add({fmt(p.f_e), fmt(p.f_u), fmt(symmetric_gap(p, c)), fmt(asymmetric_gap(p, c))});
    }
    m.set("gain", fmt(c));
    m.set("critical_f_e", fmt(critical_fraction(cfg.doc_length, c)));
  } else if (cfg.grid == "hierarchy") {
    // Gaps against 2 p_k for p_E = 0.5, U = 50, C = 900.
    t.columns = {"two_p_k", "symmetric_gap", "asymmetric_gap", "model1_wins_symmetric", "model1_wins_asymmetric"};
    for (int i = 0; i <= 100; ++i) {
      HierarchyParams p;
      p.p_k = i / 2000.0;
      p.doc_length = cfg.doc_length;
      const auto r = staged("landscape", [&] { return hierarchy_competition(p); });
      t.add({fmt(2 * p.p_k), fmt(r.symmetric_gap), fmt(r.asymmetric_gap), r.model1_wins_symmetric ? "1" : "0",
             r.model1_wins_asymmetric ? "1" : "0"});
    }
  } else {
    throw ConfigError("unknown landscape grid '" + cfg.grid + "' (gain, phase, hierarchy)");
  }
  m.set("doc_length", std::to_string(cfg.doc_length));
  m.set("num_words", std::to_string(cfg.num_words));
  std::ofstream csv(out / (cfg.grid + ".csv"));
  t.write_csv(csv);
  m.file("csv", out / (cfg.grid + ".csv"));
  m.save(out);
  std::cout << "wrote " << t.rows.size() << " rows to " << (out / (cfg.grid + ".csv")).string() << '\n';
  return 0;
}

// ---- benchmark ---------------------------------------------------------

int cmd_benchmark(const RunConfig& cfg) {
  if (cfg.presets.empty()) throw ConfigError("benchmark needs at least one --preset");
  for (const auto& p : cfg.presets) {
    if (std::find(preset_names().begin(), preset_names().end(), p) == preset_names().end()) {
      throw ConfigError("unknown benchmark preset '" + p + "'");
    }
  }
  const fs::path out = prepare_output(cfg.output);
  Manifest m(cfg, "benchmark");
  BenchmarkOptions bo;
  bo.seed = cfg.seed;
  bo.runs = cfg.runs;
  bo.threads = cfg.threads;
  bo.trials = cfg.trials;
  if (cfg.docs > 0) bo.doc_counts = {cfg.docs};
  m.set("runs", std::to_string(cfg.runs));
  m.set("trials", std::to_string(cfg.trials));
  for (const auto& p : cfg.presets) {
    const Table t = staged("benchmark " + p, [&] { return run_preset(p, bo); });
    std::ofstream csv(out / (p + ".csv"));
    t.write_csv(csv);
    m.file(p, out / (p + ".csv"));
    std::cout << p << ": " << t.rows.size() << " rows\n";
  }
  m.save(out);
  return 0;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  for (int i = 0; i < argc; ++i) cfg.command_line += (i ? " " : "") + std::string(argv[i]);

  CLI::App app{"Topic model inference and benchmarking on bag-of-words corpora"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--threads", cfg.threads, "Worker threads (default: TOPICATLAS_THREADS, else 1)");
  app.add_option("--seed", cfg.seed, "Seed for every randomized step");
  app.add_option("--output", cfg.output, "Output directory");

  auto* gen = app.add_subcommand("generate", "Write a synthetic corpus and its generative model");
  gen->add_option("--preset", cfg.presets, "egalitarian10, oligarchic, fig4-equal or fig4-unequal");
  gen->add_option("--spec", cfg.spec_file, "Spec file (key = value lines)");
  gen->add_option("--docs", cfg.docs, "Override the number of documents");
  gen->add_option("--alpha", cfg.alpha, "Override alpha (Dirichlet presets)");
  gen->add_option("--generic-fraction", cfg.generic_fraction, "Override the generic-word fraction (Dirichlet presets)");

  auto* fit = app.add_subcommand("fit", "Fit a topic model");
  fit->add_option("--input", cfg.input, "Corpus in bag-of-words format")->required();
  fit->add_option("--vocab", cfg.vocab, "Vocabulary file, one word per line");
  fit->add_option("--engine", cfg.engine, "topicmap, lda or plsa");
  fit->add_option("--k", cfg.k, "Number of topics (lda, plsa)");
  fit->add_option("--init", cfg.init, "random or seeded (lda, plsa)");
  fit->add_option("--p-value", cfg.p_value, "Significance level of the word graph");
  fit->add_option("--min-topic-docs", cfg.min_topic_docs, "Drop guessed topics used by fewer documents");
  fit->add_option("--trials", cfg.trials, "Clustering trials");
  fit->add_option("--max-iters", cfg.max_iters, "EM iterations");
  fit->add_option("--checkpoint-every", cfg.checkpoint_every, "Checkpoint cadence of the LDA step");

  auto* ev = app.add_subcommand("eval", "Compare models, score held-out documents");
  ev->add_option("--input", cfg.input, "Corpus the models were fitted on")->required();
  ev->add_option("--model", cfg.models, "Model file (repeatable)");
  ev->add_option("--runs", cfg.runs_dir, "Directory searched for model.txt files");
  ev->add_option("--truth", cfg.truth, "Generative model, for accuracy");
  ev->add_option("--heldout", cfg.heldout, "Held-out corpus, for perplexity");
  ev->add_option("--shuffles", cfg.shuffles, "Shuffles behind BM_rand");

  auto* land = app.add_subcommand("landscape", "Closed-form likelihood comparisons as CSV");
  land->add_option("--grid", cfg.grid, "gain, phase or hierarchy");
  land->add_option("--doc-length", cfg.doc_length, "L_d");
  land->add_option("--num-words", cfg.num_words, "N_w");

  auto* bench = app.add_subcommand("benchmark", "Regenerate benchmark tables as CSV");
  bench->add_option("--preset", cfg.presets, "fig2, fig4, figS5, figS2, scaling (repeatable)");
  bench->add_option("--runs", cfg.runs, "Runs per engine");
  bench->add_option("--trials", cfg.trials, "Clustering trials");
  bench->add_option("--docs", cfg.docs, "Corpus size for fig2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cfg.threads > 0) set_default_threads(cfg.threads);
    if (*gen) return cmd_generate(cfg);
    if (*fit) return cmd_fit(cfg);
    if (*ev) return cmd_eval(cfg);
    if (*land) return cmd_landscape(cfg);
    if (*bench) return cmd_benchmark(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 2;
}

#include "topicatlas/wordgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <unordered_map>

#include "topicatlas/error.hpp"
#include "topicatlas/parallel.hpp"

namespace topicatlas {

WordGraph::WordGraph(std::size_t num_nodes, std::vector<Edge> edges, std::vector<WordId> isolated)
    : edges_(std::move(edges)), isolated_(std::move(isolated)) {
  std::vector<std::size_t> degree(num_nodes, 0);
  for (const Edge& e : edges_) {
    if (e.a >= e.b || e.b >= num_nodes) throw DataError("word graph edges need a < b < num_nodes");
    if (e.weight <= 0) throw DataError("word graph edge weights must be positive");
    ++degree[e.a];
    ++degree[e.b];
  }
  offsets_.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  neighbors_.resize(offsets_.back());
  weights_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    const auto w = static_cast<double>(e.weight);
    neighbors_[fill[e.a]] = e.b;
    weights_[fill[e.a]++] = w;
    neighbors_[fill[e.b]] = e.a;
    weights_[fill[e.b]++] = w;
    total_weight_ += w;
  }
}

double WordGraph::strength(WordId v) const {
  double s = 0.0;
  for (double w : weights(v)) s += w;
  return s;
}

void WordGraph::dump(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write graph file " + path.string());
  for (const Edge& e : edges_) out << e.a << ' ' << e.b << ' ' << e.weight << '\n';
  out << "# isolated\n";
  for (WordId w : isolated_) out << w << '\n';
}

Count dot_product_sim(const Corpus& corpus, WordId a, WordId b) {
  if (a == b) throw ConfigError("dot_product_sim needs two distinct words");
  Count z = 0;
  for (const Document& d : corpus.docs()) {
    Count wa = 0, wb = 0;
    for (const Entry& e : d.entries()) {
      if (e.word == a) wa = e.count;
      if (e.word == b) wb = e.count;
    }
    z += wa * wb;
  }
  return z;
}

double null_mean(const Corpus& corpus, Count s_a, Count s_b) {
  const double lc = static_cast<double>(corpus.total_length());
  return static_cast<double>(s_a) * static_cast<double>(s_b) * corpus.sum_squared_lengths() / (lc * lc);
}

namespace {

constexpr double kExactLimit = 1e6;

double log_pmf(double mean, double z) { return -mean + z * std::log(mean) - std::lgamma(z + 1.0); }

}  // namespace

double poisson_upper_tail(double mean, Count x) {
  if (x <= 0) return 1.0;
  if (!(mean > 0.0)) return 0.0;
  const auto xd = static_cast<double>(x);
  if (mean > kExactLimit) {
    // Continuity-corrected normal approximation.
    return 0.5 * std::erfc((xd - 0.5 - mean) / std::sqrt(2.0 * mean));
  }
  if (xd > mean) {
    // Terms decrease from z = x upward: pmf(z+1) = pmf(z) * mean / (z+1).
    double term = std::exp(log_pmf(mean, xd));
    double sum = 0.0;
    for (double z = xd; term > 0.0; z += 1.0) {
      sum += term;
      if (term < sum * 1e-17) break;
      term *= mean / (z + 1.0);
    }
    return std::min(1.0, sum);
  }
  // Lower sum from z = x-1 downward: pmf(z-1) = pmf(z) * z / mean.
  double term = std::exp(log_pmf(mean, xd - 1.0));
  double lower = 0.0;
  for (double z = xd - 1.0; z >= 0.0 && term > 0.0; z -= 1.0) {
    lower += term;
    if (term < lower * 1e-17) break;
    term *= z / mean;
  }
  return std::max(0.0, 1.0 - lower);
}

Count poisson_quantile(double mean, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("poisson_quantile: p must lie in (0,1)");
  if (!(mean > 0.0)) return 0;
  // tail(lo) > p, tail(hi) <= p.
  Count lo = 0;
  Count hi = static_cast<Count>(mean + 10.0 * std::sqrt(mean) + 10.0);
  while (poisson_upper_tail(mean, hi) > p) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const Count mid = lo + (hi - lo) / 2;
    if (poisson_upper_tail(mean, mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

WordGraph build_graph(const Corpus& corpus, const GraphOptions& opts) {
  if (!(opts.p_value > 0.0 && opts.p_value < 1.0)) throw ConfigError("p-value must lie in (0,1)");
  const std::size_t n_w = corpus.vocab_size();

  struct Posting {
    std::uint32_t doc;
    Count count;
  };
  std::vector<std::vector<Posting>> postings(n_w);
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    for (const Entry& e : corpus.doc(d).entries()) postings[e.word].push_back({static_cast<std::uint32_t>(d), e.count});
  }

  const double lc = static_cast<double>(corpus.total_length());
  const double scale = corpus.sum_squared_lengths() / (lc * lc);

  // Fixed chunking keeps the output independent of the worker count.
  const std::size_t chunk_size = 256;
  const std::size_t num_chunks = (n_w + chunk_size - 1) / chunk_size;
  std::vector<std::vector<WordGraph::Edge>> chunk_edges(num_chunks);
  std::mutex progress_mutex;
  std::size_t done_words = 0;

  parallel_for(num_chunks, opts.threads, [&](std::size_t c) {
    const std::size_t lo = c * chunk_size;
    const std::size_t hi = std::min(n_w, lo + chunk_size);
    std::vector<Count> acc(n_w, 0);
    std::vector<WordId> touched;
    // Z_p depends on (s_a, s_b) only through the product s_a * s_b.
    std::unordered_map<std::uint64_t, Count> quantile_cache;
    auto& out = chunk_edges[c];
    for (std::size_t a = lo; a < hi; ++a) {
      for (const Posting& p : postings[a]) {
        for (const Entry& e : corpus.doc(p.doc).entries()) {
          if (e.word <= a) continue;
          if (acc[e.word] == 0) touched.push_back(e.word);
          acc[e.word] += p.count * e.count;
        }
      }
      std::sort(touched.begin(), touched.end());
      const auto s_a = static_cast<std::uint64_t>(corpus.word_total(static_cast<WordId>(a)));
      for (WordId b : touched) {
        const Count z = acc[b];
        acc[b] = 0;
        const std::uint64_t product = s_a * static_cast<std::uint64_t>(corpus.word_total(b));
        auto it = quantile_cache.find(product);
        if (it == quantile_cache.end()) {
          it = quantile_cache.emplace(product, poisson_quantile(static_cast<double>(product) * scale, opts.p_value)).first;
        }
        if (z > it->second) out.push_back({static_cast<WordId>(a), b, z - it->second});
      }
      touched.clear();
    }
    if (opts.progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      done_words += hi - lo;
      opts.progress(done_words, n_w);
    }
  });

  std::vector<WordGraph::Edge> edges;
  std::size_t total = 0;
  for (const auto& ce : chunk_edges) total += ce.size();
  edges.reserve(total);
  for (auto& ce : chunk_edges) edges.insert(edges.end(), ce.begin(), ce.end());

  std::vector<bool> has_edge(n_w, false);
  for (const auto& e : edges) has_edge[e.a] = has_edge[e.b] = true;
  std::vector<WordId> isolated;
  for (std::size_t w = 0; w < n_w; ++w) {
    if (corpus.word_total(static_cast<WordId>(w)) > 0 && !has_edge[w]) isolated.push_back(static_cast<WordId>(w));
  }
  return WordGraph(n_w, std::move(edges), std::move(isolated));
}

}  // namespace topicatlas

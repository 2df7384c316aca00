#include "topicatlas/mapclust.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "topicatlas/error.hpp"
#include "topicatlas/parallel.hpp"
#include "topicatlas/rng.hpp"

namespace topicatlas {

std::vector<std::vector<WordId>> Partition::members() const {
  std::vector<std::vector<WordId>> out(num_modules);
  for (std::size_t v = 0; v < module.size(); ++v) {
    if (module[v] != kUnassigned) out[static_cast<std::size_t>(module[v])].push_back(static_cast<WordId>(v));
  }
  return out;
}

void Partition::compact() {
  std::vector<int> remap;
  int next = 0;
  for (int& m : module) {
    if (m == kUnassigned) continue;
    if (static_cast<std::size_t>(m) >= remap.size()) remap.resize(static_cast<std::size_t>(m) + 1, -1);
    if (remap[static_cast<std::size_t>(m)] < 0) remap[static_cast<std::size_t>(m)] = next++;
    m = remap[static_cast<std::size_t>(m)];
  }
  num_modules = static_cast<std::size_t>(next);
}

namespace {

double plogp(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Graph at one aggregation level. Link weights are normalized so that the
// directed flows over all links (including self links) sum to 1.
struct FlowGraph {
  std::size_t n = 0;
  std::vector<double> flow;  // visit rate of each node
  std::vector<double> exit;  // flow leaving the node (self links excluded)
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> nbr;
  std::vector<double> w;

  static FlowGraph from(const WordGraph& g, const std::vector<std::size_t>& active) {
    FlowGraph f;
    f.n = active.size();
    std::vector<std::size_t> index(g.num_nodes(), SIZE_MAX);
    for (std::size_t i = 0; i < active.size(); ++i) index[active[i]] = i;
    const double two_w = 2.0 * g.total_weight();
    f.flow.assign(f.n, 0.0);
    f.offsets.assign(f.n + 1, 0);
    for (std::size_t i = 0; i < f.n; ++i) {
      const auto v = static_cast<WordId>(active[i]);
      auto ns = g.neighbors(v);
      auto ws = g.weights(v);
      for (std::size_t k = 0; k < ns.size(); ++k) {
        f.nbr.push_back(index[ns[k]]);
        f.w.push_back(ws[k] / two_w);
        f.flow[i] += ws[k] / two_w;
      }
      f.offsets[i + 1] = f.nbr.size();
    }
    f.exit = f.flow;
    return f;
  }

  // Collapses modules (ids dense in [0, m)) into nodes.
  FlowGraph aggregate(const std::vector<std::size_t>& mod, std::size_t m) const {
    FlowGraph f;
    f.n = m;
    f.flow.assign(m, 0.0);
    f.exit.assign(m, 0.0);
    f.offsets.assign(m + 1, 0);
    std::vector<std::vector<std::size_t>> groups(m);
    for (std::size_t v = 0; v < n; ++v) {
      groups[mod[v]].push_back(v);
      f.flow[mod[v]] += flow[v];
    }
    std::vector<double> acc(m, 0.0);
    std::vector<std::size_t> touched;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t v : groups[a]) {
        for (std::size_t k = offsets[v]; k < offsets[v + 1]; ++k) {
          const std::size_t b = mod[nbr[k]];
          if (b == a) continue;
          if (acc[b] == 0.0) touched.push_back(b);
          acc[b] += w[k];
        }
      }
      std::sort(touched.begin(), touched.end());
      for (std::size_t b : touched) {
        f.nbr.push_back(b);
        f.w.push_back(acc[b]);
        f.exit[a] += acc[b];
        acc[b] = 0.0;
      }
      touched.clear();
      f.offsets[a + 1] = f.nbr.size();
    }
    return f;
  }
};

// Module bookkeeping for greedy moves on one FlowGraph.
class ModuleState {
 public:
  ModuleState(const FlowGraph& g, std::vector<std::size_t> mod, double node_entropy_term)
      : g_(g), mod_(std::move(mod)), node_term_(node_entropy_term) {
    q_.assign(g.n, 0.0);
    p_.assign(g.n, 0.0);
    size_.assign(g.n, 0);
    for (std::size_t v = 0; v < g.n; ++v) {
      p_[mod_[v]] += g.flow[v];
      ++size_[mod_[v]];
      q_[mod_[v]] += g.exit[v];
      for (std::size_t k = g.offsets[v]; k < g.offsets[v + 1]; ++k) {
        if (mod_[g.nbr[k]] == mod_[v]) q_[mod_[v]] -= g.w[k];
      }
    }
    for (std::size_t m = 0; m < g.n; ++m) {
      q_[m] = std::max(0.0, q_[m]);
      if (size_[m] == 0) free_.push_back(m);
      sum_q_ += q_[m];
      sum_plogp_q_ += plogp(q_[m]);
      sum_plogp_qp_ += plogp(q_[m] + p_[m]);
    }
    std::reverse(free_.begin(), free_.end());
    link_.assign(g.n, 0.0);
  }

  double codelength() const { return plogp(sum_q_) - 2.0 * sum_plogp_q_ - node_term_ + sum_plogp_qp_; }

  // One pass over all nodes in `order`; returns the number of moves made.
  std::size_t sweep(const std::vector<std::size_t>& order) {
    std::size_t moves = 0;
    for (std::size_t v : order) {
      const std::size_t from = mod_[v];
      for (std::size_t k = g_.offsets[v]; k < g_.offsets[v + 1]; ++k) {
        const std::size_t m = mod_[g_.nbr[k]];
        if (link_[m] == 0.0) touched_.push_back(m);
        link_[m] += g_.w[k];
      }
      const double w_from = link_[from];
      double best_delta = -kMinGain;
      std::size_t best = from;
      double best_w = 0.0;
      for (std::size_t m : touched_) {
        if (m == from) continue;
        const double d = delta(v, from, m, w_from, link_[m]);
        if (d < best_delta) {
          best_delta = d;
          best = m;
          best_w = link_[m];
        }
      }
      if (size_[from] > 1 && !free_.empty()) {
        const double d = delta(v, from, free_.back(), w_from, 0.0);
        if (d < best_delta) {
          best_delta = d;
          best = free_.back();
          best_w = 0.0;
        }
      }
      for (std::size_t m : touched_) link_[m] = 0.0;
      touched_.clear();
      if (best != from) {
        apply(v, from, best, w_from, best_w);
        ++moves;
      }
    }
    return moves;
  }

  // Dense module ids in order of first appearance; returns the count.
  std::size_t relabel(std::vector<std::size_t>& out) const {
    std::vector<std::size_t> remap(g_.n, SIZE_MAX);
    std::size_t next = 0;
    out.resize(g_.n);
    for (std::size_t v = 0; v < g_.n; ++v) {
      if (remap[mod_[v]] == SIZE_MAX) remap[mod_[v]] = next++;
      out[v] = remap[mod_[v]];
    }
    return next;
  }

 private:
  static constexpr double kMinGain = 1e-12;

  struct Terms {
    double qi, qj, pi, pj;
  };

  Terms after(std::size_t v, std::size_t i, std::size_t j, double w_i, double w_j) const {
    return {std::max(0.0, q_[i] - g_.exit[v] + 2.0 * w_i), std::max(0.0, q_[j] + g_.exit[v] - 2.0 * w_j),
            p_[i] - g_.flow[v], p_[j] + g_.flow[v]};
  }

  double delta(std::size_t v, std::size_t i, std::size_t j, double w_i, double w_j) const {
    const Terms t = after(v, i, j, w_i, w_j);
    const double new_sum_q = sum_q_ + (t.qi - q_[i]) + (t.qj - q_[j]);
    return plogp(new_sum_q) - plogp(sum_q_) - 2.0 * (plogp(t.qi) + plogp(t.qj) - plogp(q_[i]) - plogp(q_[j])) +
           (plogp(t.qi + t.pi) + plogp(t.qj + t.pj) - plogp(q_[i] + p_[i]) - plogp(q_[j] + p_[j]));
  }

  void apply(std::size_t v, std::size_t i, std::size_t j, double w_i, double w_j) {
    const Terms t = after(v, i, j, w_i, w_j);
    if (size_[j] == 0) free_.pop_back();
    sum_q_ += (t.qi - q_[i]) + (t.qj - q_[j]);
    sum_plogp_q_ += plogp(t.qi) + plogp(t.qj) - plogp(q_[i]) - plogp(q_[j]);
    sum_plogp_qp_ += plogp(t.qi + t.pi) + plogp(t.qj + t.pj) - plogp(q_[i] + p_[i]) - plogp(q_[j] + p_[j]);
    q_[i] = t.qi;
    q_[j] = t.qj;
    p_[i] = t.pi;
    p_[j] = t.pj;
    --size_[i];
    ++size_[j];
    mod_[v] = j;
    if (size_[i] == 0) {
      // Guard against drift: an empty module has no flow.
      sum_q_ -= q_[i];
      sum_plogp_q_ -= plogp(q_[i]);
      sum_plogp_qp_ -= plogp(q_[i] + p_[i]);
      q_[i] = p_[i] = 0.0;
      free_.push_back(i);
    }
  }

  const FlowGraph& g_;
  std::vector<std::size_t> mod_;
  double node_term_;
  std::vector<double> q_, p_;
  std::vector<std::size_t> size_;
  std::vector<std::size_t> free_;
  double sum_q_ = 0.0, sum_plogp_q_ = 0.0, sum_plogp_qp_ = 0.0;
  std::vector<double> link_;
  std::vector<std::size_t> touched_;
};

constexpr std::size_t kMaxSweeps = 200;
constexpr double kMinImprovement = 1e-10;

// Local moves until a pass changes nothing; returns dense module ids.
std::size_t move_nodes(const FlowGraph& g, std::vector<std::size_t>& mod, double node_term, Rng& rng) {
  ModuleState state(g, mod, node_term);
  std::vector<std::size_t> order(g.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double current = state.codelength();
  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    rng.shuffle(order);
    if (state.sweep(order) == 0) break;
    const double next = state.codelength();
    const bool stalled = current - next < kMinImprovement;
    current = next;
    if (stalled) break;
  }
  return state.relabel(mod);
}

// Node moves followed by repeated aggregation, starting from `assignment`
// on the base graph. Returns module ids for the base nodes.
std::vector<std::size_t> optimize_levels(const FlowGraph& base, std::vector<std::size_t> assignment, double node_term,
                                         Rng& rng) {
  std::size_t m = move_nodes(base, assignment, node_term, rng);
  std::vector<std::size_t> result = assignment;
  FlowGraph level = base.aggregate(assignment, m);
  while (true) {
    std::vector<std::size_t> mod(level.n);
    std::iota(mod.begin(), mod.end(), std::size_t{0});
    const std::size_t merged = move_nodes(level, mod, node_term, rng);
    if (merged == level.n) break;
    for (std::size_t& r : result) r = mod[r];
    level = level.aggregate(mod, merged);
  }
  return result;
}

double base_codelength(const FlowGraph& g, const std::vector<std::size_t>& mod, double node_term) {
  return ModuleState(g, mod, node_term).codelength();
}

// Merges all modules of one connected component whenever that lowers the
// codelength. Pairwise node moves can miss this on dense components.
void merge_components(const FlowGraph& g, const std::vector<std::size_t>& component, std::size_t num_components,
                      std::vector<std::size_t>& mod, double node_term) {
  double current = base_codelength(g, mod, node_term);
  for (std::size_t c = 0; c < num_components; ++c) {
    std::vector<std::size_t> trial = mod;
    std::size_t target = SIZE_MAX;
    for (std::size_t v = 0; v < g.n; ++v) {
      if (component[v] != c) continue;
      if (target == SIZE_MAX) target = mod[v];
      trial[v] = target;
    }
    const double next = base_codelength(g, trial, node_term);
    if (next < current - kMinImprovement) {
      mod = std::move(trial);
      current = next;
    }
  }
}

std::size_t label_components(const FlowGraph& g, std::vector<std::size_t>& component) {
  component.assign(g.n, SIZE_MAX);
  std::size_t count = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < g.n; ++s) {
    if (component[s] != SIZE_MAX) continue;
    component[s] = count;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t k = g.offsets[v]; k < g.offsets[v + 1]; ++k) {
        if (component[g.nbr[k]] == SIZE_MAX) {
          component[g.nbr[k]] = count;
          stack.push_back(g.nbr[k]);
        }
      }
    }
    ++count;
  }
  return count;
}

std::vector<std::size_t> active_nodes(const WordGraph& graph) {
  std::vector<std::size_t> active;
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    if (graph.degree(static_cast<WordId>(v)) > 0) active.push_back(v);
  }
  return active;
}

double node_entropy_term(const FlowGraph& g) {
  double s = 0.0;
  for (double p : g.flow) s += plogp(p);
  return s;
}

Partition to_partition(const WordGraph& graph, const std::vector<std::size_t>& active,
                       const std::vector<std::size_t>& mod) {
  Partition p;
  p.module.assign(graph.num_nodes(), Partition::kUnassigned);
  for (std::size_t i = 0; i < active.size(); ++i) p.module[active[i]] = static_cast<int>(mod[i]);
  p.compact();
  return p;
}

}  // namespace

double codelength(const WordGraph& graph, const Partition& partition) {
  if (graph.num_edges() == 0) throw ConfigError("codelength of an empty graph is undefined");
  if (partition.module.size() != graph.num_nodes()) throw ConfigError("partition size does not match the graph");
  const auto active = active_nodes(graph);
  const FlowGraph g = FlowGraph::from(graph, active);
  std::vector<std::size_t> mod(active.size());
  std::vector<std::size_t> remap;
  std::size_t next = 0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const int m = partition.module[active[i]];
    if (m < 0) throw ConfigError("partition leaves a connected node unassigned");
    if (static_cast<std::size_t>(m) >= remap.size()) remap.resize(static_cast<std::size_t>(m) + 1, SIZE_MAX);
    if (remap[static_cast<std::size_t>(m)] == SIZE_MAX) remap[static_cast<std::size_t>(m)] = next++;
    mod[i] = remap[static_cast<std::size_t>(m)];
  }
  return base_codelength(g, mod, node_entropy_term(g));
}

Partition component_partition(const WordGraph& graph) {
  const auto active = active_nodes(graph);
  const FlowGraph g = FlowGraph::from(graph, active);
  std::vector<std::size_t> component;
  label_components(g, component);
  return to_partition(graph, active, component);
}

ClusterResult cluster(const WordGraph& graph, const ClusterOptions& opts) {
  if (opts.trials == 0) throw ConfigError("cluster needs at least one trial");
  if (graph.num_edges() == 0) {
    ClusterResult empty;
    empty.partition.module.assign(graph.num_nodes(), Partition::kUnassigned);
    return empty;
  }
  const auto active = active_nodes(graph);
  const FlowGraph g = FlowGraph::from(graph, active);
  const double node_term = node_entropy_term(g);
  std::vector<std::size_t> component;
  const std::size_t num_components = label_components(g, component);

  struct Trial {
    std::vector<std::size_t> mod;
    double length = 0.0;
  };
  std::vector<Trial> trials(opts.trials);
  parallel_for(opts.trials, opts.threads, [&](std::size_t t) {
    Rng rng(opts.seed, 0x3a9c0000ULL + t);
    std::vector<std::size_t> mod(g.n);
    std::iota(mod.begin(), mod.end(), std::size_t{0});
    mod = optimize_levels(g, std::move(mod), node_term, rng);
    double length = base_codelength(g, mod, node_term);
    // Refine from the original nodes, keeping the current modules.
    while (true) {
      auto refined = optimize_levels(g, mod, node_term, rng);
      const double next = base_codelength(g, refined, node_term);
      if (next >= length - kMinImprovement) break;
      mod = std::move(refined);
      length = next;
    }
    merge_components(g, component, num_components, mod, node_term);
    const double final_length = base_codelength(g, mod, node_term);
    trials[t] = {std::move(mod), final_length};
  });

  std::size_t best = 0;
  for (std::size_t t = 1; t < trials.size(); ++t) {
    if (trials[t].length < trials[best].length) best = t;
  }
  std::vector<std::size_t> mod = trials[best].mod;
  double length = trials[best].length;
  const double components_length = base_codelength(g, component, node_term);
  if (components_length < length) {
    mod = component;
    length = components_length;
  }
  return {to_partition(graph, active, mod), length, best};
}

void save_partition(const Partition& partition, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write partition file " + path.string());
  for (std::size_t v = 0; v < partition.module.size(); ++v) {
    if (partition.module[v] != Partition::kUnassigned) out << v << ' ' << partition.module[v] << '\n';
  }
}

}  // namespace topicatlas

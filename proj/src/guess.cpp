#include "topicatlas/guess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topicatlas/error.hpp"
#include "topicatlas/parallel.hpp"

namespace topicatlas {

namespace {

void add_count(std::vector<GuessState::TopicCount>& list, int t, Count c) {
  auto it = std::lower_bound(list.begin(), list.end(), t, [](const auto& p, int v) { return p.first < v; });
  if (it != list.end() && it->first == t) {
    it->second += c;
  } else {
    list.insert(it, {t, c});
  }
}

}  // namespace

GuessState::GuessState(const Corpus& corpus, std::size_t num_topics, std::vector<std::vector<int>> assignment)
    : num_topics_(num_topics),
      num_words_(corpus.vocab_size()),
      total_length_(corpus.total_length()),
      assignment_(std::move(assignment)) {
  if (assignment_.size() != corpus.num_docs()) throw DataError("guess state does not match the corpus");
  doc_lengths_.resize(corpus.num_docs());
  doc_topics_.resize(corpus.num_docs());
  word_topics_.resize(num_words_);
  topic_totals_.assign(num_topics_, 0);
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto& entries = corpus.doc(d).entries();
    if (assignment_[d].size() != entries.size()) throw DataError("guess state does not match the corpus");
    doc_lengths_[d] = corpus.doc(d).length();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const int t = assignment_[d][i];
      if (t == kOrphan) continue;
      if (t < 0 || static_cast<std::size_t>(t) >= num_topics_) throw DataError("topic id out of range");
      add_count(doc_topics_[d], t, entries[i].count);
      add_count(word_topics_[entries[i].word], t, entries[i].count);
      topic_totals_[static_cast<std::size_t>(t)] += entries[i].count;
      assigned_total_ += entries[i].count;
    }
  }
}

Count GuessState::word_topic(WordId w, int t) const {
  const auto& list = word_topics_[w];
  auto it = std::lower_bound(list.begin(), list.end(), t, [](const auto& p, int v) { return p.first < v; });
  return it != list.end() && it->first == t ? it->second : 0;
}

std::vector<double> GuessState::topic_marginal() const {
  std::vector<double> p(num_topics_, 0.0);
  if (assigned_total_ == 0) return p;
  for (std::size_t t = 0; t < num_topics_; ++t) {
    p[t] = static_cast<double>(topic_totals_[t]) / static_cast<double>(assigned_total_);
  }
  return p;
}

std::vector<double> GuessState::doc_distribution(std::size_t d) const {
  std::vector<double> p(num_topics_, 0.0);
  for (auto [t, x] : doc_topics_[d]) p[static_cast<std::size_t>(t)] = static_cast<double>(x) / static_cast<double>(doc_lengths_[d]);
  return p;
}

TopicModel GuessState::to_model(double alpha) const {
  if (has_orphans()) throw DataError("guess still has unassigned words");
  TopicModel m(num_topics_, num_docs(), num_words_);
  std::fill(m.alpha.begin(), m.alpha.end(), alpha);
  for (std::size_t d = 0; d < num_docs(); ++d) {
    auto row = m.theta_row(d);
    for (auto [t, x] : doc_topics_[d]) row[static_cast<std::size_t>(t)] = static_cast<double>(x) / static_cast<double>(doc_lengths_[d]);
  }
  for (std::size_t w = 0; w < num_words_; ++w) {
    for (auto [t, n] : word_topics_[w]) {
      m.beta_row(static_cast<std::size_t>(t))[w] = static_cast<double>(n) / static_cast<double>(topic_totals_[static_cast<std::size_t>(t)]);
    }
  }
  for (std::size_t t = 0; t < num_topics_; ++t) {
    m.p_topic[t] = static_cast<double>(topic_totals_[t]) / static_cast<double>(total_length_);
  }
  return m;
}

GuessState init_from_partition(const Corpus& corpus, const Partition& partition) {
  if (partition.module.size() < corpus.vocab_size()) throw DataError("partition does not cover the vocabulary");
  std::vector<std::vector<int>> assignment(corpus.num_docs());
  std::size_t k = partition.num_modules;
  // No clusters at all (an edgeless graph): a single topic holds every word.
  const bool single = k == 0;
  if (single) k = 1;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    for (const Entry& e : corpus.doc(d).entries()) assignment[d].push_back(single ? 0 : partition.module[e.word]);
  }
  return GuessState(corpus, k, std::move(assignment));
}

double log_binomial_upper_tail(Count n, Count x, double p) {
  if (x <= 0) return 0.0;
  if (x > n) return -std::numeric_limits<double>::infinity();
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return 0.0;
  const double nd = static_cast<double>(n);
  const double lp = std::log(p), lq = std::log1p(-p);
  auto log_pmf = [&](double k) {
    return std::lgamma(nd + 1.0) - std::lgamma(k + 1.0) - std::lgamma(nd - k + 1.0) + k * lp + (nd - k) * lq;
  };
  const double xd = static_cast<double>(x);
  const double ratio = p / (1.0 - p);
  if (xd > nd * p) {
    // Terms decrease from k = x upward; sum relative to the first.
    const double first = log_pmf(xd);
    double term = 1.0, sum = 0.0;
    for (double k = xd; k <= nd; k += 1.0) {
      sum += term;
      if (term < sum * 1e-17) break;
      term *= (nd - k) / (k + 1.0) * ratio;
    }
    return first + std::log(sum);
  }
  // Tail is at least ~1/2: 1 - P(X <= x-1), summing downward from x-1.
  double term = std::exp(log_pmf(xd - 1.0));
  double lower = 0.0;
  for (double k = xd - 1.0; k >= 0.0 && term > 0.0; k -= 1.0) {
    lower += term;
    if (term < lower * 1e-17) break;
    term *= k / (nd - k + 1.0) / ratio;
  }
  return std::log1p(-std::min(lower, 1.0));
}

int most_significant_topic(const GuessState& state, std::size_t d, std::span<const double> p_topic) {
  const auto& topics = state.doc_topics(d);
  if (topics.empty()) throw DataError("document " + std::to_string(d) + " has no assigned topic");
  // L_d includes orphan tokens, if any remain.
  const Count l_d = state.doc_length(d);
  int best = -1;
  double best_tail = 0.0;
  Count best_x = 0;
  for (auto [t, x] : topics) {
    const double tail = log_binomial_upper_tail(l_d, x, p_topic[static_cast<std::size_t>(t)]);
    const bool better = best < 0 || tail < best_tail - 1e-12 || (std::abs(tail - best_tail) <= 1e-12 && x > best_x);
    if (better) {
      best = t;
      best_tail = tail;
      best_x = x;
    }
  }
  return best;
}

std::vector<int> most_significant_topics(const GuessState& state, std::span<const double> p_topic) {
  std::vector<int> tau(state.num_docs());
  for (std::size_t d = 0; d < state.num_docs(); ++d) tau[d] = most_significant_topic(state, d, p_topic);
  return tau;
}

GuessState eta_filter(const Corpus& corpus, const GuessState& state, double eta, const std::vector<int>& tau) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0,1]");
  if (tau.size() != state.num_docs()) throw ConfigError("tau does not match the documents");
  auto assignment = state.assignment();
  for (std::size_t d = 0; d < state.num_docs(); ++d) {
    const double l_d = static_cast<double>(state.doc_length(d));
    std::vector<int> infrequent;
    for (auto [t, x] : state.doc_topics(d)) {
      if (t != tau[d] && static_cast<double>(x) / l_d < eta) infrequent.push_back(t);
    }
    if (infrequent.empty()) continue;
    for (int& t : assignment[d]) {
      if (std::binary_search(infrequent.begin(), infrequent.end(), t)) t = tau[d];
    }
  }
  return GuessState(corpus, state.num_topics(), std::move(assignment));
}

double plsa_loglik(const Corpus& corpus, const GuessState& state) {
  if (state.has_orphans()) throw DataError("guess still has unassigned words");
  const double l_c = static_cast<double>(corpus.total_length());
  std::vector<double> inv_total(state.num_topics(), 0.0);
  for (std::size_t t = 0; t < state.num_topics(); ++t) {
    const Count n = state.topic_total(static_cast<int>(t));
    if (n > 0) inv_total[t] = 1.0 / static_cast<double>(n);
  }
  double ll = 0.0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const double l_d = static_cast<double>(corpus.doc(d).length());
    const auto& topics = state.doc_topics(d);
    for (const Entry& e : corpus.doc(d).entries()) {
      double p = 0.0;
      for (auto [t, x] : topics) {
        const Count n = state.word_topic(e.word, t);
        if (n > 0) p += static_cast<double>(n) * inv_total[static_cast<std::size_t>(t)] * static_cast<double>(x) / l_d;
      }
      if (!(p > 0.0)) throw NumericalError("observed word has zero probability under the guess");
      ll += static_cast<double>(e.count) * std::log(p);
    }
    ll += l_d * std::log(l_d / l_c);
  }
  return ll;
}

EtaSweepResult eta_sweep(const Corpus& corpus, const GuessState& state0, std::size_t threads) {
  const auto tau = most_significant_topics(state0, state0.topic_marginal());
  constexpr std::size_t kSteps = 51;
  std::vector<GuessState> states(kSteps);
  std::vector<double> logliks(kSteps);
  parallel_for(kSteps, threads, [&](std::size_t i) {
    const double eta = static_cast<double>(i) / 100.0;
    states[i] = eta_filter(corpus, state0, eta, tau);
    logliks[i] = plsa_loglik(corpus, states[i]);
  });
  EtaSweepResult out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < kSteps; ++i) {
    out.trace.emplace_back(static_cast<double>(i) / 100.0, logliks[i]);
    if (logliks[i] > logliks[best]) best = i;
  }
  out.state = std::move(states[best]);
  out.eta = static_cast<double>(best) / 100.0;
  out.loglik = logliks[best];
  return out;
}

namespace {

int largest_topic(const GuessState& state, const std::vector<bool>& allowed) {
  int best = -1;
  for (std::size_t t = 0; t < state.num_topics(); ++t) {
    if (!allowed[t]) continue;
    if (best < 0 || state.topic_total(static_cast<int>(t)) > state.topic_total(best)) best = static_cast<int>(t);
  }
  return best;
}

}  // namespace

GuessState assign_orphans(const Corpus& corpus, const GuessState& state) {
  if (!state.has_orphans()) return state;
  const auto p_topic = state.topic_marginal();
  const int fallback = largest_topic(state, std::vector<bool>(state.num_topics(), true));
  auto assignment = state.assignment();
  for (std::size_t d = 0; d < state.num_docs(); ++d) {
    if (std::find(assignment[d].begin(), assignment[d].end(), GuessState::kOrphan) == assignment[d].end()) continue;
    const int tau = state.doc_topics(d).empty() ? fallback : most_significant_topic(state, d, p_topic);
    for (int& t : assignment[d]) {
      if (t == GuessState::kOrphan) t = tau;
    }
  }
  return GuessState(corpus, state.num_topics(), std::move(assignment));
}

GuessState prune_small_topics(const Corpus& corpus, const GuessState& state, std::size_t min_docs) {
  const auto p_topic = state.topic_marginal();
  const auto tau = most_significant_topics(state, p_topic);
  std::vector<std::size_t> chosen(state.num_topics(), 0);
  for (int t : tau) ++chosen[static_cast<std::size_t>(t)];
  std::vector<bool> keep(state.num_topics());
  for (std::size_t t = 0; t < state.num_topics(); ++t) keep[t] = chosen[t] > 0 && chosen[t] >= min_docs;
  if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; })) {
    // Never prune everything: keep the most chosen topic.
    keep[static_cast<std::size_t>(std::max_element(chosen.begin(), chosen.end()) - chosen.begin())] = true;
  }
  const int fallback = largest_topic(state, keep);

  auto assignment = state.assignment();
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < state.num_docs(); ++d) {
    // Next most significant topic among the survivors present in d.
    int target = -1;
    double best_tail = inf;
    Count best_x = 0;
    for (auto [t, x] : state.doc_topics(d)) {
      if (!keep[static_cast<std::size_t>(t)]) continue;
      const double tail = log_binomial_upper_tail(state.doc_length(d), x, p_topic[static_cast<std::size_t>(t)]);
      if (target < 0 || tail < best_tail - 1e-12 || (std::abs(tail - best_tail) <= 1e-12 && x > best_x)) {
        target = t;
        best_tail = tail;
        best_x = x;
      }
    }
    if (target < 0) target = fallback;
    for (int& t : assignment[d]) {
      if (t != GuessState::kOrphan && !keep[static_cast<std::size_t>(t)]) t = target;
    }
  }

  std::vector<int> remap(state.num_topics(), -1);
  int next = 0;
  for (std::size_t t = 0; t < state.num_topics(); ++t) {
    if (keep[t]) remap[t] = next++;
  }
  for (auto& row : assignment) {
    for (int& t : row) {
      if (t != GuessState::kOrphan) t = remap[static_cast<std::size_t>(t)];
    }
  }
  return GuessState(corpus, static_cast<std::size_t>(next), std::move(assignment));
}

EtaSweepResult run_guess(const Corpus& corpus, const Partition& partition, const GuessOptions& opts) {
  GuessState state = init_from_partition(corpus, partition);
  state = assign_orphans(corpus, state);
  state = prune_small_topics(corpus, state, opts.min_topic_docs);
  return eta_sweep(corpus, state, opts.threads);
}

}  // namespace topicatlas

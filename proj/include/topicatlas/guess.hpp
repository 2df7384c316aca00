#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "topicatlas/corpus.hpp"
#include "topicatlas/mapclust.hpp"
#include "topicatlas/topic_model.hpp"

namespace topicatlas {

// Hard topic assignment of every (document, word) cell of the corpus. All
// derived quantities are integers: x(d,t) is the number of tokens of d
// assigned to t (so p(t|d) = x(d,t)/L_d) and n(w,t) the number of tokens of
// w assigned to t. Cells of words that never made it into a cluster hold
// kOrphan until assign_orphans() runs.
class GuessState {
 public:
  static constexpr int kOrphan = -1;
  using TopicCount = std::pair<int, Count>;

  GuessState() = default;
  GuessState(const Corpus& corpus, std::size_t num_topics, std::vector<std::vector<int>> assignment);

  std::size_t num_topics() const { return num_topics_; }
  std::size_t num_docs() const { return assignment_.size(); }
  Count doc_length(std::size_t d) const { return doc_lengths_[d]; }
  const std::vector<std::vector<int>>& assignment() const { return assignment_; }

  // Nonzero (topic, x) pairs of a document, sorted by topic.
  const std::vector<TopicCount>& doc_topics(std::size_t d) const { return doc_topics_[d]; }
  // Nonzero (topic, n) pairs of a word, sorted by topic.
  const std::vector<TopicCount>& word_topics(WordId w) const { return word_topics_[w]; }
  Count word_topic(WordId w, int t) const;
  Count topic_total(int t) const { return topic_totals_[static_cast<std::size_t>(t)]; }
  // Tokens with a topic; equals L_C once orphans are assigned.
  Count assigned_total() const { return assigned_total_; }
  bool has_orphans() const { return assigned_total_ != total_length_; }

  // p(t) = n(t) / sum_t n(t).
  std::vector<double> topic_marginal() const;
  // p(t|d) = x(d,t) / L_d, dense.
  std::vector<double> doc_distribution(std::size_t d) const;

  // Conversion for downstream refinement: theta = p(t|d), beta = n(w,t)/n(t),
  // p_topic = n(t)/L_C and alpha set to `alpha` for every topic.
  TopicModel to_model(double alpha = 0.01) const;

 private:
  std::size_t num_topics_ = 0;
  std::size_t num_words_ = 0;
  Count total_length_ = 0;
  Count assigned_total_ = 0;
  std::vector<std::vector<int>> assignment_;
  std::vector<Count> doc_lengths_;
  std::vector<std::vector<TopicCount>> doc_topics_;
  std::vector<std::vector<TopicCount>> word_topics_;
  std::vector<Count> topic_totals_;
};

// Every word takes the topic of its cluster.
GuessState init_from_partition(const Corpus& corpus, const Partition& partition);

// log P(X >= x) for X ~ Binomial(n, p).
double log_binomial_upper_tail(Count n, Count x, double p);

// Topic of document d with the smallest binomial p-value B(x; L_d, p(t)).
// Ties go to the larger x, then the lower topic id. Throws DataError when
// the document has no assigned tokens.
int most_significant_topic(const GuessState& state, std::size_t d, std::span<const double> p_topic);
std::vector<int> most_significant_topics(const GuessState& state, std::span<const double> p_topic);

// Moves the tokens of every topic with p(t|d) < eta onto tau[d].
GuessState eta_filter(const Corpus& corpus, const GuessState& state, double eta, const std::vector<int>& tau);

// sum_{d,w} w_w^d log sum_t p(w|t) p(t|d) + sum_d L_d log(L_d/L_C), natural log.
// Throws NumericalError when an observed word gets zero probability.
double plsa_loglik(const Corpus& corpus, const GuessState& state);

struct EtaSweepResult {
  GuessState state;
  double eta = 0.0;
  double loglik = 0.0;
  std::vector<std::pair<double, double>> trace;  // (eta, loglik)
};

// Applies eta_filter for eta = 0.00, 0.01, ..., 0.50, each to state0 with
// tau fixed from state0, and keeps the likelihood maximizer (the smaller eta
// on ties).
EtaSweepResult eta_sweep(const Corpus& corpus, const GuessState& state0, std::size_t threads = 0);

// Gives each orphan cell the topic tau_d of its document. A document made
// only of orphans goes to the topic with the most tokens.
GuessState assign_orphans(const Corpus& corpus, const GuessState& state);

// Removes topics chosen as tau_d by fewer than min_docs documents (and
// always those chosen by none). Tokens of removed topics move to the
// document's most significant remaining topic. Topic ids are renumbered
// densely, preserving order.
GuessState prune_small_topics(const Corpus& corpus, const GuessState& state, std::size_t min_docs);

struct GuessOptions {
  std::size_t min_topic_docs = 0;
  std::size_t threads = 0;
};

// init_from_partition, assign_orphans, prune_small_topics, eta_sweep.
EtaSweepResult run_guess(const Corpus& corpus, const Partition& partition, const GuessOptions& opts = {});

}  // namespace topicatlas

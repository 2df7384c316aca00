#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topicatlas/corpus.hpp"
#include "topicatlas/infer.hpp"
#include "topicatlas/topic_model.hpp"

namespace topicatlas {

// K x M table whose rows are distributions over M items (documents or
// words), with a weight per row.
struct TopicProfiles {
  std::size_t num_topics = 0;
  std::size_t num_items = 0;
  std::vector<double> rows;
  std::vector<double> weights;

  std::span<const double> row(std::size_t t) const { return {rows.data() + t * num_items, num_items}; }
};

// p(doc|t) via Bayes from theta with p(doc) = L_d/L_C; weights p_topic.
TopicProfiles doc_profiles(const TopicModel& model, const Corpus& corpus);
// p(word|t) straight from beta; weights p_topic.
TopicProfiles word_profiles(const TopicModel& model);

// s = 1 - (1/2) || p(.|t') - q(.|t'') ||_1.
double topic_similarity(const TopicProfiles& p, std::size_t t1, const TopicProfiles& q, std::size_t t2);
double topic_similarity(const TopicModel& pm, const TopicModel& qm, const Corpus& corpus, std::size_t t1,
                        std::size_t t2);

struct BestMatch {
  double forward = 0.0;   // sum_t' p(t') max_t'' s(t', t'')
  double backward = 0.0;  // same with the roles swapped
  double bm = 0.0;        // mean of the two
};

BestMatch best_match(const TopicProfiles& p, const TopicProfiles& q);
BestMatch best_match(const TopicModel& pm, const TopicModel& qm, const Corpus& corpus);

struct NormalizedMatch {
  BestMatch match;
  double bm_rand = 0.0;
  double bm_n = 0.0;
  // BM_rand == 1, so BM_n falls back to 1 (BM == 1) or 0.
  bool degenerate = false;
};

// BM_n = (BM - BM_rand) / (1 - BM_rand), with BM_rand averaged over
// `shuffles` random relabelings of the items.
NormalizedMatch bm_normalized(const TopicProfiles& p, const TopicProfiles& q, std::size_t shuffles = 20,
                              std::uint64_t seed = 1);
NormalizedMatch bm_normalized(const TopicModel& pm, const TopicModel& qm, const Corpus& corpus,
                              std::size_t shuffles = 20, std::uint64_t seed = 1);
NormalizedMatch bm_normalized_words(const TopicModel& pm, const TopicModel& qm, std::size_t shuffles = 20,
                                    std::uint64_t seed = 1);

// 2^h, h the entropy of p in bits.
double effective_topics(std::span<const double> p);

// exp(-sum w log q(w|d) / sum L_d), with p(topic|doc) folded in for the
// held-out documents and the topics fixed.
double perplexity(const TopicModel& model, const Corpus& heldout, std::size_t threads = 0);
// Same, for a given D x K table of p(topic|doc).
double perplexity(const TopicModel& model, const Corpus& docs, std::span<const double> theta);

enum class Engine { TopicMap, Lda, Plsa };
Engine parse_engine(const std::string& s);
std::string to_string(Engine e);

struct ScanPoint {
  std::size_t k = 0;
  double heldout_loglik = 0.0;  // per word, natural log
  double perplexity = 0.0;
  double effective_topics = 0.0;
  std::string error;  // nonempty when the fit for this K failed
};

struct ScanOptions {
  double holdout_fraction = 0.1;
  std::uint64_t seed = 1;
  FitOptions fit;
};

// For each K: hold out a fraction of documents, fit on the rest with the
// LDA or PLSA engine and score the held-out part.
std::vector<ScanPoint> heldout_scan(const Corpus& corpus, const std::vector<std::size_t>& k_list, Engine engine,
                                    const ScanOptions& opts = {});

struct EvalReport {
  std::optional<NormalizedMatch> doc_match;
  std::optional<NormalizedMatch> word_match;
  std::optional<double> perplexity;
  std::optional<double> heldout_loglik;
  double effective_topics = 0.0;
  std::size_t num_topics = 0;
  double seconds = 0.0;

  // key=value lines; absent fields are omitted.
  void write(std::ostream& out) const;
  static std::string csv_header();
  std::string csv_row() const;
};

}  // namespace topicatlas

#pragma once
// Closed forms for the likelihood of the generative model of a language
// corpus against alternatives that overfit one language and underfit
// others. All logs are natural; count_alt_models reports log10.

#include <cstdint>
#include <vector>

namespace topicatlas {

struct LanguageParams {
  std::size_t doc_length = 10;  // L_d
  std::size_t num_words = 20;   // N_w per language
  std::size_t num_topics = 3;   // K
  double f_e = 0.0;             // fraction of documents in the overfitted language
  double f_u = 0.0;             // fraction in the two merged languages

  void validate() const;
};

struct HierarchyParams {
  double p_e = 0.5;  // fraction of documents in the language with subtopics
  double p_k = 0.0;  // fraction in each other language
  double unique_words = 50;   // U, words private to one subtopic
  double common_words = 900;  // C, words shared by both subtopics
  std::size_t doc_length = 100;
  std::size_t num_words = 1000;

  void validate() const;
};

// -L_d ln N_w.
double true_loglik_per_doc(std::size_t doc_length, std::size_t num_words);

// Expected log-likelihood per document of one language split in two
// dialects: the first a words of the vocabulary form group a, and a
// document goes to dialect 1 when at least T of its words fall in group a.
// Falls back to the unsplit value when one dialect is never used.
double enumerate_alt_likelihood(std::size_t doc_length, std::size_t num_words, std::size_t a, std::size_t threshold);

struct OverfitGain {
  double gain = 0.0;  // C
  std::size_t a = 0;
  std::size_t threshold = 0;
};

// Best split over (a, T). Exhaustive when L_d * N_w <= 1e7, otherwise
// T = 1 (N_w >= L_d) or T = ceil(L_d / N_w) with a golden-section search
// over a. The gain is symmetric under a -> N_w - a; the smaller a is
// reported.
OverfitGain overfit_gain(std::size_t doc_length, std::size_t num_words);

// <log L_alt> - log L_true per document when the -log K terms cancel.
double symmetric_gap(const LanguageParams& p, double c);
// Same when each topic carries its own probability.
double asymmetric_gap(const LanguageParams& p, double c);
// f_E at which symmetric_gap vanishes for f_U = 1 - f_E.
double critical_fraction(std::size_t doc_length, double c);

// 1 - f_U ln 2 / ln N_w.
double loglik_ratio(double f_u, std::size_t num_words);

// log10 of the binomial coefficient C(N_w, a).
double count_alt_models(std::size_t num_words, std::size_t a);

struct HierarchyResult {
  // log L(model 1) - log L(model 2) per document; model 1 keeps the
  // language whole, model 2 splits it into subtopics and merges two others.
  double symmetric_gap = 0.0;
  double asymmetric_gap = 0.0;
  bool model1_wins_symmetric = false;
  bool model1_wins_asymmetric = false;
  // 2 p_k below which model 2 wins in the symmetric case.
  double threshold = 0.0;
};

HierarchyResult hierarchy_competition(const HierarchyParams& p);

struct EmpiricalGap {
  double mean = 0.0;
  double std_error = 0.0;
  double expected = 0.0;  // symmetric_gap for the same parameters
};

// Generates a three-language corpus (fractions f_E, f_U/2, f_U/2) and
// evaluates, document by document, the log-likelihood of the alternative
// model (best dialect split of language 0, languages 1 and 2 merged)
// minus that of the generative model.
EmpiricalGap empirical_symmetric_gap(const LanguageParams& p, std::size_t num_docs, std::uint64_t seed);

struct GainPoint {
  std::size_t doc_length = 0;
  std::size_t num_words = 0;
  OverfitGain best;
};

// Gain over a grid of L_d for fixed N_w.
std::vector<GainPoint> gain_curve(std::size_t num_words, const std::vector<std::size_t>& doc_lengths,
                                  std::size_t threads = 0);

}  // namespace topicatlas

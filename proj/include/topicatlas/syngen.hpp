#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "topicatlas/corpus.hpp"
#include "topicatlas/rng.hpp"
#include "topicatlas/topic_model.hpp"

namespace topicatlas {

// Draws from Dirichlet(alphas) by normalizing Gamma(alpha_i, 1) variates.
// Normalization happens in log space so alphas down to ~1e-6 still give a
// proper simplex point.
std::vector<double> sample_dirichlet(std::span<const double> alphas, Rng& rng);

// Disjoint-vocabulary "language" corpus. Language k owns the index block
// [offset_k, offset_k + freqs[k].size()).
struct LanguageSpec {
  std::vector<double> p_lang;
  std::vector<std::vector<double>> freqs;
  std::size_t doc_length = 0;
  std::size_t num_docs = 0;

  std::size_t num_languages() const { return p_lang.size(); }
  void validate() const;

  // K languages of n_w equiprobable words each.
  static LanguageSpec uniform(std::vector<double> p_lang, std::size_t n_w, std::size_t doc_length,
                              std::size_t num_docs);
  // Ten equiprobable languages.
  static LanguageSpec egalitarian(std::size_t n_w, std::size_t doc_length, std::size_t num_docs);
  // Two languages at 30% and eight at 5%.
  static LanguageSpec oligarchic(std::size_t n_w, std::size_t doc_length, std::size_t num_docs);
};

struct DirichletSpec {
  std::size_t num_docs = 1000;
  std::size_t doc_length = 50;
  std::size_t num_words = 2000;
  std::vector<double> p_topic;  // size K
  double alpha = 1e-3;
  double generic_fraction = 0.0;
  std::vector<double> p_word;  // empty = uniform

  std::size_t num_topics() const { return p_topic.size(); }
  std::size_t num_generic() const;
  void validate() const;

  static DirichletSpec equal_topics(std::size_t k = 20);
  // 4 topics at 15% and 16 at 2.5%.
  static DirichletSpec unequal_topics();
};

struct GeneratedCorpus {
  Corpus corpus;
  TopicModel truth;
  // Words drawn with the alpha = 1 rule (a prefix of the index range).
  std::vector<WordId> generic_words;
};

GeneratedCorpus gen_language_corpus(const LanguageSpec& spec, std::uint64_t seed);
GeneratedCorpus gen_dirichlet_corpus(const DirichletSpec& spec, std::uint64_t seed);

// Flat "key = value" spec file. Recognized keys:
//   model = language | dirichlet
//   D, L_d, K, N_w, alpha, generic_fraction, seed
//   p_topic = list (dirichlet), p_lang = list (language)
//   freq_files = list of per-language frequency files (language)
// Lists are comma or whitespace separated; '#' starts a comment.
struct SpecFile {
  std::map<std::string, std::string> values;

  static SpecFile parse(std::istream& in);
  static SpecFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;
};

// Reads a per-language frequency file: one nonnegative weight per line
// (an optional leading label column is ignored). Result is normalized.
std::vector<double> load_frequency_file(const std::filesystem::path& path);

LanguageSpec language_spec_from(const SpecFile& file, const std::filesystem::path& base_dir = {});
DirichletSpec dirichlet_spec_from(const SpecFile& file);

}  // namespace topicatlas

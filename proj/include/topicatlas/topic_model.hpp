#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "topicatlas/corpus.hpp"

namespace topicatlas {

// p(topic|doc), p(word|topic), the topic marginal and the Dirichlet
// hyperparameters. theta is D x K and beta is K x N_w, both row-major.
struct TopicModel {
  std::size_t num_topics = 0;
  std::size_t num_docs = 0;
  std::size_t num_words = 0;
  std::vector<double> alpha;    // K
  std::vector<double> p_topic;  // K
  std::vector<double> theta;    // D * K
  std::vector<double> beta;     // K * N_w

  TopicModel() = default;
  TopicModel(std::size_t k, std::size_t d, std::size_t n_w);

  std::span<double> theta_row(std::size_t d) { return {theta.data() + d * num_topics, num_topics}; }
  std::span<const double> theta_row(std::size_t d) const { return {theta.data() + d * num_topics, num_topics}; }
  std::span<double> beta_row(std::size_t t) { return {beta.data() + t * num_words, num_words}; }
  std::span<const double> beta_row(std::size_t t) const { return {beta.data() + t * num_words, num_words}; }

  // p_topic = sum_d (L_d / L_C) theta_d.
  void derive_p_topic(const Corpus& corpus);

  // Checks row sums (within tol), alpha > 0, and table shapes.
  bool valid(double tol = 1e-9) const;

  friend bool operator==(const TopicModel&, const TopicModel&) = default;
};

// Text format:
//   K D N_w
//   alpha_1 ... alpha_K
//   p_topic_1 ... p_topic_K
//   D theta rows:  n t:p t:p ...   (nonzero entries only)
//   K beta rows:   p_1 ... p_N_w   (dense)
// Numbers are written with 17 significant digits so loading is lossless.
void write_model(const TopicModel& model, std::ostream& out);
TopicModel read_model(std::istream& in);
void save_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_model(const std::filesystem::path& path);

// Writes "iter,value" rows with a header.
void save_trace(const std::vector<double>& trace, const std::filesystem::path& path);

}  // namespace topicatlas

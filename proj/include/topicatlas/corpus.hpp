#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace topicatlas {

using WordId = std::uint32_t;
using Count = std::int64_t;

struct Vocabulary {
  std::size_t size = 0;
  // Empty, or one unique label per index.
  std::vector<std::string> labels;

  bool has_labels() const { return !labels.empty(); }
};

// One (word, count) cell of the bag-of-words matrix.
struct Entry {
  WordId word = 0;
  Count count = 0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

class Document {
 public:
  Document() = default;
  // Throws DataError on duplicate words or non-positive counts.
  explicit Document(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t unique_words() const { return entries_.size(); }
  Count length() const { return length_; }

  friend bool operator==(const Document&, const Document&) = default;

 private:
  std::vector<Entry> entries_;
  Count length_ = 0;
};

// Immutable bag-of-words corpus with cached per-word totals s_a and the
// corpus length L_C.
class Corpus {
 public:
  Corpus() = default;
  // vocab_size of 0 means "infer as 1 + max index". Throws DataError on
  // empty documents or indices outside the vocabulary.
  Corpus(std::vector<Document> docs, Vocabulary vocab);

  const std::vector<Document>& docs() const { return docs_; }
  const Document& doc(std::size_t d) const { return docs_[d]; }
  std::size_t num_docs() const { return docs_.size(); }
  const Vocabulary& vocab() const { return vocab_; }
  std::size_t vocab_size() const { return vocab_.size; }

  Count word_total(WordId w) const { return word_totals_[w]; }
  const std::vector<Count>& word_totals() const { return word_totals_; }
  Count total_length() const { return total_length_; }
  // Sum over documents of L_d^2.
  double sum_squared_lengths() const { return sum_sq_lengths_; }

  // Subset of documents (in the given order) sharing this vocabulary.
  Corpus subset(const std::vector<std::size_t>& doc_ids) const;

  // Recomputes s_a and L_C from the documents and compares with the cache.
  bool totals_consistent() const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.docs_ == b.docs_ && a.vocab_.size == b.vocab_.size && a.vocab_.labels == b.vocab_.labels;
  }

 private:
  std::vector<Document> docs_;
  Vocabulary vocab_;
  std::vector<Count> word_totals_;
  Count total_length_ = 0;
  double sum_sq_lengths_ = 0.0;
};

// Parses the "U idx:cnt idx:cnt ..." line format. When vocab_path is given
// it supplies labels (one per line, line number = index) and fixes the
// vocabulary size.
Corpus load_bagofwords(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& vocab_path = std::nullopt);
Corpus parse_bagofwords(std::istream& in, std::optional<Vocabulary> vocab = std::nullopt);

void save_bagofwords(const Corpus& corpus, const std::filesystem::path& path);
void write_bagofwords(const Corpus& corpus, std::ostream& out);

Vocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);

struct HoldoutSplit {
  Corpus train;
  Corpus test;
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> test_ids;
};

// Holds out round(fraction * D) documents chosen by a seeded shuffle.
// Both halves keep the original document order and vocabulary.
HoldoutSplit split_holdout(const Corpus& corpus, double fraction, std::uint64_t seed);

}  // namespace topicatlas

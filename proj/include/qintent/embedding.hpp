#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qintent {

struct CorpusSlice;

enum class EmbeddingKind { Pretrained, OneHot };

enum class DistanceKind { SquaredL2, L1, Cosine };

std::string_view distance_name(DistanceKind k);
/// Accepts "squared-l2"/"l2", "l1", "cosine".
DistanceKind parse_distance(std::string_view name);

/// Word -> fixed-length vector map. Immutable after construction.
///
/// One-hot tables store only the vocabulary; vectors are materialized on
/// demand, so a 50k-word vocabulary costs no more than its strings.
class EmbeddingTable {
 public:
  static EmbeddingTable pretrained(std::size_t dim);
  static EmbeddingTable one_hot(std::vector<std::string> vocabulary);

  std::size_t dim() const { return dim_; }
  EmbeddingKind kind() const { return kind_; }
  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view word) const;
  std::optional<std::size_t> index_of(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }

  /// Writes the vector for `word` into out (size dim). False if absent.
  bool lookup(std::string_view word, std::span<double> out) const;
  std::optional<std::vector<double>> vector(std::string_view word) const;
  /// Dense row for pretrained tables; empty span for one-hot.
  std::span<const double> row(std::size_t index) const;

  /// Appends a pretrained vector; returns false (and stores nothing) for a duplicate word.
  bool add(std::string word, std::span<const double> values);

 private:
  EmbeddingTable(std::size_t dim, EmbeddingKind kind) : dim_(dim), kind_(kind) {}

  std::size_t dim_;
  EmbeddingKind kind_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

struct LoadReport {
  std::size_t lines = 0;
  std::size_t duplicates = 0;
  bool had_header = false;
};

/// Reads the GloVe / fastText text layout: `word v1 ... vd` per line. A leading
/// `count dim` line (fastText) is accepted as a header. Dimension is taken from
/// the first vector unless expected_dim is given.
EmbeddingTable load_pretrained(std::istream& in, std::optional<std::size_t> expected_dim = {},
                               LoadReport* report = nullptr);
EmbeddingTable load_pretrained_file(const std::string& path,
                                    std::optional<std::size_t> expected_dim = {},
                                    LoadReport* report = nullptr);

/// Vocabulary in first-appearance order over the slice's tokens.
EmbeddingTable build_one_hot(const CorpusSlice& slice);

/// `word<TAB>index` per line.
void write_one_hot_vocab(std::ostream& out, const EmbeddingTable& table);
EmbeddingTable read_one_hot_vocab(std::istream& in);

double distance(std::span<const double> u, std::span<const double> v, DistanceKind kind);

struct SimilarWords {
  std::vector<std::pair<std::string, double>> matches;  // sorted by candidate
  bool query_word_oov = false;
};

/// Candidates within `threshold` of `word`. Exact string matches are reported
/// at distance 0 without a candidate vector lookup. Similarity requires distance
/// strictly below the threshold, so threshold 0 yields exact matches only. An
/// out-of-vocabulary `word` gives an empty result with query_word_oov set.
SimilarWords similar_words(std::string_view word, const std::vector<std::string>& candidates,
                           const EmbeddingTable& emb, DistanceKind kind, double threshold);

}  // namespace qintent

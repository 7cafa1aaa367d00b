#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qintent {

class EmbeddingTable;
class Labeler;

/// Calendar date as exported by the ads platform (YYYYMMDD).
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  static std::optional<Date> parse(std::string_view yyyymmdd);
  std::string str() const;
  bool operator==(const Date&) const = default;
};

/// One row of the six-column keyword export.
struct QueryRecord {
  std::int64_t id_group = 0;
  std::int64_t id_keyword = 0;
  Date date;
  std::uint64_t impressions = 0;
  std::uint64_t clicks = 0;
  std::string keyword;

  bool operator==(const QueryRecord&) const = default;
};

/// Writes a record back in the input layout (no trailing newline).
std::string serialize_record(const QueryRecord& r, char delimiter = ',');

/// Pull-style source of well-formed records. Slicing assigns each record its
/// 0-based position in this stream as the record index.
class RecordStream {
 public:
  virtual ~RecordStream() = default;
  virtual std::optional<QueryRecord> next() = 0;
};

/// Streaming delimited-text reader. Malformed rows are counted, optionally
/// copied verbatim to a reject log, and skipped.
class CsvReader : public RecordStream {
 public:
  CsvReader(std::istream& in, char delimiter = ',', std::ostream* reject_log = nullptr);

  std::optional<QueryRecord> next() override;

  std::size_t skipped() const { return skipped_; }
  std::size_t emitted() const { return emitted_; }
  bool header_seen() const { return header_seen_; }

 private:
  std::istream& in_;
  char delim_;
  std::ostream* rejects_;
  std::size_t line_no_ = 0;
  std::size_t skipped_ = 0;
  std::size_t emitted_ = 0;
  bool header_seen_ = false;
};

/// RecordStream over an in-memory vector.
class VectorRecordStream : public RecordStream {
 public:
  explicit VectorRecordStream(std::vector<QueryRecord> records) : records_(std::move(records)) {}
  std::optional<QueryRecord> next() override {
    if (pos_ >= records_.size()) return std::nullopt;
    return records_[pos_++];
  }

 private:
  std::vector<QueryRecord> records_;
  std::size_t pos_ = 0;
};

/// Parses a whole stream; convenience over CsvReader.
std::vector<QueryRecord> parse_csv(std::istream& in, char delimiter = ',',
                                   std::size_t* skipped = nullptr,
                                   std::ostream* reject_log = nullptr);

/// Splits one delimited row. Double-quoted fields may contain the delimiter;
/// `""` inside quotes is a literal quote.
std::vector<std::string> split_row(std::string_view line, char delimiter);

/// Lowercased, whitespace-split, punctuation-stripped tokens. Returns nullopt
/// when nothing survives (query unusable). A single leading '.' directly before
/// the token body is kept so domain suffixes like ".au" survive.
std::optional<std::vector<std::string>> tokenize(std::string_view keyword);

std::string join_tokens(const std::vector<std::string>& tokens);

struct TokenizedQuery {
  std::size_t record_index = 0;
  std::vector<std::string> tokens;

  bool operator==(const TokenizedQuery&) const = default;
};

namespace drop_reason {
inline constexpr std::string_view kUnusable = "unusable-query";
inline constexpr std::string_view kLangMismatch = "lang-mismatch";
inline constexpr std::string_view kLangError = "lang-detect-error";
inline constexpr std::string_view kNoLabel = "no-label";
inline constexpr std::string_view kNoEmbedding = "no-embedding";
}  // namespace drop_reason

struct CorpusSlice {
  std::string name;
  std::vector<TokenizedQuery> records;
  std::map<std::string, std::size_t> filter_log;
  std::size_t input_size = 0;

  std::size_t dropped() const;
  /// records.size() == input_size - dropped()
  bool reconciles() const { return records.size() + dropped() == input_size; }
  bool operator==(const CorpusSlice&) const = default;
};

/// First n records of the stream, tokenized; unusable queries are logged.
CorpusSlice slice_first_n(RecordStream& records, std::size_t n);

/// Maps (record index, record) to a language code. Returning nullopt or
/// throwing counts as a detection failure.
using LanguageDetector =
    std::function<std::optional<std::string>(std::size_t, const QueryRecord&)>;

/// Reads `index<TAB>langcode` lines and answers by record index.
class SidecarLanguageDetector {
 public:
  explicit SidecarLanguageDetector(std::istream& sidecar);
  std::optional<std::string> operator()(std::size_t index, const QueryRecord&) const;
  std::size_t size() const { return langs_.size(); }

 private:
  std::map<std::size_t, std::string> langs_;
};

CorpusSlice slice_by_language(RecordStream& records, const LanguageDetector& detector,
                              const std::string& lang);

enum class OovPolicy {
  AllTokens,  // drop only when no token is embedded
  AnyToken,   // drop when any token lacks an embedding
};

/// Keeps queries the labeler labels and that have embedded tokens per policy.
/// The result keeps the input's input_size and extends its filter_log.
CorpusSlice filter_trainable(const CorpusSlice& slice, const Labeler& labeler,
                             const EmbeddingTable& emb, OovPolicy policy = OovPolicy::AllTokens);

/// Manifest layout: `#`-prefixed header block (name, input, kept, per-reason
/// drop counts), a `---` line, then `record_index<TAB>tokens` per query.
void write_manifest(std::ostream& out, const CorpusSlice& slice);
CorpusSlice read_manifest(std::istream& in);

}  // namespace qintent

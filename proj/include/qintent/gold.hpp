#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qintent/intent.hpp"

namespace qintent {

enum class AnnotationMode { MultiIntent, SingleIntent };

std::string_view mode_name(AnnotationMode m);  // "multi" / "single"
AnnotationMode parse_mode(std::string_view text);

struct AnnotationRecord {
  std::int64_t query_id = 0;
  std::string annotator_id;
  MultiHotLabel label = MultiHotLabel::single(Intent::Informational);
  AnnotationMode mode = AnnotationMode::MultiIntent;
};

/// `query_id<TAB>annotator_id<TAB>i,t,n<TAB>mode` per line. Throws FormatError
/// on a malformed line and InvariantError on a single-intent record with more
/// than one bit.
std::vector<AnnotationRecord> read_annotations(std::istream& in);
void write_annotation(std::ostream& out, const AnnotationRecord& r);

/// Class c is kept iff at least two of three annotators set it. nullopt when no
/// class reaches two votes. Throws InvariantError unless given three records of
/// one query from distinct annotators.
std::optional<IntentDistribution> aggregate_gt2(std::span<const AnnotationRecord> labels);
/// Kept iff all three bit vectors are identical and one-hot.
std::optional<IntentDistribution> aggregate_gt3(std::span<const AnnotationRecord> labels);

struct GoldEntry {
  std::int64_t query_id = 0;
  std::vector<std::string> tokens;
  IntentDistribution target = IntentDistribution({1.0, 0.0, 0.0});
};

struct GoldSet {
  std::string name;
  std::vector<GoldEntry> entries;                   // ascending query_id
  std::map<std::int64_t, std::string> excluded;     // query_id -> reason

  std::array<std::size_t, kNumIntents> counts() const;
  std::optional<GoldEntry> find(std::int64_t query_id) const;
};

struct GoldBuild {
  GoldSet gt2;
  GoldSet gt3;
  /// Queries without exactly three valid annotations.
  std::map<std::int64_t, std::string> validation;
};

/// `query_id<TAB>query text` per line.
std::map<std::int64_t, std::string> read_query_texts(std::istream& in);

/// Aggregates every query. Queries absent from `texts` get empty token lists.
GoldBuild build_gold(const std::vector<AnnotationRecord>& records,
                     const std::map<std::int64_t, std::string>& texts);

/// Entries/Info/Counts table in the layout of the ground-truth summary.
std::string format_gold_summary(const GoldBuild& build);

/// Same `query-tokens<TAB>i,t,n` layout as the labeled corpus. Reading assigns
/// query ids by line order.
void write_gold(std::ostream& out, const GoldSet& gold);
GoldSet read_gold(std::istream& in, std::string name);

}  // namespace qintent

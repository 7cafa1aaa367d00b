#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qintent/embedding.hpp"
#include "qintent/intent.hpp"

namespace qintent {

enum class LabelerVersion { V1 = 1, V2, V3, V4, V5, V6, V7, V8 };

enum class MatchPolicy {
  LastMatchSingle,       // V1
  AllMatches,            // V2-V5
  Similarity,            // V6
  SimilarityExactFirst,  // V7, V8
};

/// How the file's [transactional] / [navigational] sections map to intents.
/// The published V4 table has those two rows swapped relative to the gold
/// annotations, so SwappedTN is the default.
enum class RowMapping { AsPrinted, SwappedTN };

LabelerVersion parse_version(std::string_view text);  // "v4" / "V4" / "4"
std::string version_name(LabelerVersion v);
MatchPolicy default_policy(LabelerVersion v);
RowMapping parse_row_mapping(std::string_view text);  // "as-printed" / "swapped-tn"

inline constexpr std::size_t kMaxPhraseWords = 4;

/// A phrase is its tokens joined by single spaces.
using PhraseSet = std::set<std::string>;

/// Per-intent phrase sets in intent order, exactly as the file's sections.
struct KeywordSections {
  std::array<PhraseSet, kNumIntents> sections;
};

/// Sections `[informational]`, `[transactional]`, `[navigational]`, one
/// phrase per line, `#` comments. Phrases go through the query tokenizer.
KeywordSections read_keyword_sections(std::istream& in);
void write_keyword_sections(std::ostream& out, const KeywordSections& s);

/// One word per line, `#` comments.
std::set<std::string> read_word_list(std::istream& in);

/// `phrase<TAB>syn1|syn2|...` per line; treated as a symmetric relation.
using SynonymLexicon = std::map<std::string, std::set<std::string>>;
SynonymLexicon read_synonyms(std::istream& in);

struct KeywordRuleSet {
  /// Effective phrase sets by intent (row mapping already applied).
  std::array<PhraseSet, kNumIntents> phrases;
  LabelerVersion version = LabelerVersion::V4;
  MatchPolicy policy = MatchPolicy::AllMatches;
  RowMapping row_mapping = RowMapping::SwappedTN;
  std::set<std::string> stopwords;
  SynonymLexicon synonyms;
  std::shared_ptr<const EmbeddingTable> embedding;
  std::optional<DistanceKind> distance;
  std::optional<double> threshold;
  /// Words removed from the similarity candidates (V7 test-set exclusion).
  std::set<std::string> similarity_exclusions;

  /// Throws InvariantError on uppercase or over-long phrases, or a similarity
  /// policy without embedding/distance/threshold.
  void validate() const;
  /// Stopwords take part in matching from V3 onward.
  bool uses_stopwords() const { return version >= LabelerVersion::V3; }
  /// Synonym expansion applies from V5 onward.
  bool uses_synonyms() const { return version >= LabelerVersion::V5; }
  /// Canonical text form, stable across runs; fingerprint input.
  std::string canonical() const;
};

/// Builds a rule set for `version` with its default policy.
KeywordRuleSet make_rule_set(LabelerVersion version, const KeywordSections& sections,
                             RowMapping mapping = RowMapping::SwappedTN);

/// Applies the synonym lexicon to every phrase set. Stopwords and phrases
/// longer than kMaxPhraseWords are never added.
std::array<PhraseSet, kNumIntents> expand_synonyms(const std::array<PhraseSet, kNumIntents>& sets,
                                                   const SynonymLexicon& synonyms,
                                                   const std::set<std::string>& stopwords);

/// Per-intent top-k words by frequency over labeled queries (stopwords removed,
/// ties broken alphabetically). A word counts once per query per intent.
std::array<std::vector<std::string>, kNumIntents> top_words_per_intent(
    const std::vector<std::pair<std::vector<std::string>, MultiHotLabel>>& labeled,
    const std::set<std::string>& stopwords, std::size_t k = 50);

void merge_top_words(KeywordRuleSet& rules,
                     const std::array<std::vector<std::string>, kNumIntents>& top);

}  // namespace qintent

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qintent/corpus.hpp"
#include "qintent/intent.hpp"
#include "qintent/rules.hpp"

namespace qintent {

struct PhraseMatch {
  std::string phrase;
  Intent intent;
  std::size_t position;

  bool operator==(const PhraseMatch&) const = default;
};

/// Compiled form of a KeywordRuleSet: synonym-expanded phrase index plus the
/// embedded unigram keywords used by the similarity policies. Immutable and
/// safe to share across threads.
class Labeler {
 public:
  explicit Labeler(KeywordRuleSet rules);

  const KeywordRuleSet& rules() const { return rules_; }

  /// All n-gram matches (n = 1..4). At each start position only the longest
  /// matching phrase is reported, once per intent that lists it. Output is
  /// ordered by position, then intent.
  std::vector<PhraseMatch> match_phrases(const std::vector<std::string>& tokens) const;

  /// Intents reached by embedding similarity alone (unigram keywords only).
  std::array<bool, kNumIntents> similarity_hits(const std::vector<std::string>& tokens) const;

  /// Dispatches on the rule set's match policy.
  std::optional<MultiHotLabel> label(const std::vector<std::string>& tokens) const;

 private:
  KeywordRuleSet rules_;
  std::unordered_map<std::string, std::array<bool, kNumIntents>> phrase_index_;
  std::size_t max_phrase_words_ = 0;
  struct Candidate {
    std::string word;
    std::vector<double> vec;
  };
  std::array<std::vector<Candidate>, kNumIntents> candidates_;
};

std::vector<PhraseMatch> match_phrases(const TokenizedQuery& query, const Labeler& labeler);
/// Intent of the match at the greatest position; ties go to the first intent in I, T, N order.
std::optional<MultiHotLabel> label_v1(const TokenizedQuery& query, const Labeler& labeler);
/// Union over all matches.
std::optional<MultiHotLabel> label_multi(const TokenizedQuery& query, const Labeler& labeler);
/// Exact matches united with similarity hits (Similarity), or similarity hits only
/// when no exact match exists (SimilarityExactFirst).
std::optional<MultiHotLabel> label_similarity(const TokenizedQuery& query, const Labeler& labeler);

/// Labels every query of the slice in order, optionally on several threads.
std::vector<std::optional<MultiHotLabel>> label_all(const CorpusSlice& slice,
                                                    const Labeler& labeler,
                                                    std::size_t jobs = 1);

inline IntentDistribution to_distribution(const MultiHotLabel& label) {
  return IntentDistribution::uniform_over(label);
}

struct LabelingStats {
  std::size_t total_labeled = 0;
  std::array<std::size_t, kNumIntents> per_intent{};
  std::size_t dropped = 0;

  bool operator==(const LabelingStats&) const = default;
};

LabelingStats labeling_stats(const std::vector<std::optional<MultiHotLabel>>& labels);
std::string format_stats(const LabelingStats& s);

struct LabeledQuery {
  std::vector<std::string> tokens;
  IntentDistribution target = IntentDistribution({1.0, 0.0, 0.0});
};

/// `query-tokens<TAB>i,t,n` per line, six decimals.
void write_labeled(std::ostream& out, const std::vector<LabeledQuery>& corpus);
std::vector<LabeledQuery> read_labeled(std::istream& in);

/// Ext-1 tool export `id<TAB>i,t,n`. All-zero and malformed lines are skipped
/// and counted.
std::map<std::int64_t, MultiHotLabel> import_ext1(std::istream& in, std::size_t* skipped = nullptr);

}  // namespace qintent

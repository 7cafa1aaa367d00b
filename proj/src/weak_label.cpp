#include "qintent/weak_label.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "qintent/error.hpp"
#include "qintent/parallel.hpp"

namespace qintent {

Labeler::Labeler(KeywordRuleSet rules) : rules_(std::move(rules)) {
  rules_.validate();
  static const std::set<std::string> kNoStopwords;
  const auto& stop = rules_.uses_stopwords() ? rules_.stopwords : kNoStopwords;
  const auto effective = rules_.uses_synonyms() && !rules_.synonyms.empty()
                             ? expand_synonyms(rules_.phrases, rules_.synonyms, stop)
                             : rules_.phrases;
  for (std::size_t c = 0; c < kNumIntents; ++c) {
    for (const auto& p : effective[c]) {
      phrase_index_[p][c] = true;
      max_phrase_words_ =
          std::max<std::size_t>(max_phrase_words_, std::count(p.begin(), p.end(), ' ') + 1);
    }
  }
  const bool similarity = rules_.policy == MatchPolicy::Similarity ||
                          rules_.policy == MatchPolicy::SimilarityExactFirst;
  if (!similarity) return;
  const auto& emb = *rules_.embedding;
  for (std::size_t c = 0; c < kNumIntents; ++c) {
    for (const auto& p : effective[c]) {
      if (p.find(' ') != std::string::npos || rules_.similarity_exclusions.count(p)) continue;
      auto vec = emb.vector(p);
      if (!vec) continue;
      if (*rules_.distance == DistanceKind::Cosine &&
          std::all_of(vec->begin(), vec->end(), [](double x) { return x == 0.0; }))
        continue;
      candidates_[c].push_back({p, std::move(*vec)});
    }
  }
}

std::vector<PhraseMatch> Labeler::match_phrases(const std::vector<std::string>& tokens) const {
  std::vector<PhraseMatch> out;
  for (std::size_t start = 0; start < tokens.size(); ++start) {
    const std::size_t longest = std::min(max_phrase_words_, tokens.size() - start);
    for (std::size_t len = longest; len >= 1; --len) {
      std::string key = tokens[start];
      for (std::size_t k = 1; k < len; ++k) key += ' ' + tokens[start + k];
      auto it = phrase_index_.find(key);
      if (it == phrase_index_.end()) continue;
      for (std::size_t c = 0; c < kNumIntents; ++c)
        if (it->second[c]) out.push_back({key, kAllIntents[c], start});
      break;
    }
  }
  return out;
}

std::array<bool, kNumIntents> Labeler::similarity_hits(const std::vector<std::string>& tokens) const {
  std::array<bool, kNumIntents> hits{};
  if (!rules_.embedding) return hits;
  const auto& emb = *rules_.embedding;
  const DistanceKind kind = *rules_.distance;
  const double threshold = *rules_.threshold;
  std::vector<double> q(emb.dim());
  // No string-equality shortcut here: a unigram keyword hidden behind a longer
  // phrase at the same position must not come back through similarity, or
  // threshold 0 would stop reducing to exact matching.
  for (const auto& t : tokens) {
    if (rules_.uses_stopwords() && rules_.stopwords.count(t)) continue;
    if (!emb.lookup(t, q)) continue;
    if (kind == DistanceKind::Cosine && std::all_of(q.begin(), q.end(), [](double x) { return x == 0.0; }))
      continue;
    for (std::size_t c = 0; c < kNumIntents; ++c) {
      if (hits[c]) continue;
      for (const auto& cand : candidates_[c]) {
        if (distance(q, cand.vec, kind) < threshold) {
          hits[c] = true;
          break;
        }
      }
    }
  }
  return hits;
}

namespace {

std::optional<MultiHotLabel> union_of(const std::vector<PhraseMatch>& matches) {
  std::array<bool, kNumIntents> bits{};
  for (const auto& m : matches) bits[index_of(m.intent)] = true;
  return MultiHotLabel::from_bits(bits);
}

}  // namespace

std::optional<MultiHotLabel> Labeler::label(const std::vector<std::string>& tokens) const {
  switch (rules_.policy) {
    case MatchPolicy::LastMatchSingle: {
      const auto matches = match_phrases(tokens);
      if (matches.empty()) return std::nullopt;
      const PhraseMatch* last = &matches.front();
      for (const auto& m : matches)
        if (m.position > last->position) last = &m;
      return MultiHotLabel::single(last->intent);
    }
    case MatchPolicy::AllMatches:
      return union_of(match_phrases(tokens));
    case MatchPolicy::Similarity: {
      auto bits = similarity_hits(tokens);
      for (const auto& m : match_phrases(tokens)) bits[index_of(m.intent)] = true;
      return MultiHotLabel::from_bits(bits);
    }
    case MatchPolicy::SimilarityExactFirst: {
      const auto matches = match_phrases(tokens);
      if (!matches.empty()) return union_of(matches);
      return MultiHotLabel::from_bits(similarity_hits(tokens));
    }
  }
  return std::nullopt;
}

std::vector<PhraseMatch> match_phrases(const TokenizedQuery& query, const Labeler& labeler) {
  return labeler.match_phrases(query.tokens);
}

std::optional<MultiHotLabel> label_v1(const TokenizedQuery& query, const Labeler& labeler) {
  if (labeler.rules().policy != MatchPolicy::LastMatchSingle)
    throw InvariantError("label_v1 needs a last-match-single rule set");
  return labeler.label(query.tokens);
}

std::optional<MultiHotLabel> label_multi(const TokenizedQuery& query, const Labeler& labeler) {
  if (labeler.rules().policy != MatchPolicy::AllMatches)
    throw InvariantError("label_multi needs an all-matches rule set");
  return labeler.label(query.tokens);
}

std::optional<MultiHotLabel> label_similarity(const TokenizedQuery& query, const Labeler& labeler) {
  const auto p = labeler.rules().policy;
  if (p != MatchPolicy::Similarity && p != MatchPolicy::SimilarityExactFirst)
    throw InvariantError("label_similarity needs a similarity rule set");
  return labeler.label(query.tokens);
}

std::vector<std::optional<MultiHotLabel>> label_all(const CorpusSlice& slice,
                                                    const Labeler& labeler, std::size_t jobs) {
  return parallel_map(slice.records.size(), jobs,
                      [&](std::size_t i) { return labeler.label(slice.records[i].tokens); });
}

LabelingStats labeling_stats(const std::vector<std::optional<MultiHotLabel>>& labels) {
  LabelingStats s;
  for (const auto& l : labels) {
    if (!l) {
      ++s.dropped;
      continue;
    }
    ++s.total_labeled;
    for (std::size_t c = 0; c < kNumIntents; ++c) s.per_intent[c] += l->bits()[c];
  }
  return s;
}

std::string format_stats(const LabelingStats& s) {
  std::ostringstream os;
  os << "labeled=" << s.total_labeled << " informational=" << s.per_intent[0]
     << " transactional=" << s.per_intent[1] << " navigational=" << s.per_intent[2]
     << " dropped=" << s.dropped;
  return os.str();
}

void write_labeled(std::ostream& out, const std::vector<LabeledQuery>& corpus) {
  for (const auto& q : corpus) out << join_tokens(q.tokens) << '\t' << format_weights(q.target) << '\n';
}

std::vector<LabeledQuery> read_labeled(std::istream& in) {
  std::vector<LabeledQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw FormatError("labeled line " + std::to_string(line_no) + ": expected tokens<TAB>i,t,n");
    auto tokens = tokenize(std::string_view(line).substr(0, tab));
    if (!tokens) throw FormatError("labeled line " + std::to_string(line_no) + ": empty query");
    try {
      out.push_back({std::move(*tokens), parse_weights(std::string_view(line).substr(tab + 1))});
    } catch (const Error& e) {
      throw FormatError("labeled line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::int64_t, MultiHotLabel> import_ext1(std::istream& in, std::size_t* skipped) {
  std::map<std::int64_t, MultiHotLabel> out;
  std::size_t bad = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::int64_t id = 0;
    if (tab == std::string::npos) {
      ++bad;
      continue;
    }
    auto [p, ec] = std::from_chars(line.data(), line.data() + tab, id);
    if (ec != std::errc() || p != line.data() + tab) {
      ++bad;
      continue;
    }
    try {
      out.insert_or_assign(id, parse_bits(std::string_view(line).substr(tab + 1)));
    } catch (const Error&) {
      ++bad;
    }
  }
  if (skipped) *skipped = bad;
  return out;
}

}  // namespace qintent

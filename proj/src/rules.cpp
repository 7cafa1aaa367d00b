#include "qintent/rules.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "qintent/corpus.hpp"
#include "qintent/error.hpp"

namespace qintent {

namespace {

std::string strip_comment(const std::string& line) {
  std::string s = line.substr(0, line.find('#'));
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

std::size_t word_count(const std::string& phrase) {
  return static_cast<std::size_t>(std::count(phrase.begin(), phrase.end(), ' ')) + 1;
}

/// Normalizes a phrase through the query tokenizer.
std::optional<std::string> normalize_phrase(std::string_view raw) {
  auto tokens = tokenize(raw);
  if (!tokens) return std::nullopt;
  return join_tokens(*tokens);
}

}  // namespace

LabelerVersion parse_version(std::string_view text) {
  if (!text.empty() && (text.front() == 'v' || text.front() == 'V')) text.remove_prefix(1);
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '8')
    return static_cast<LabelerVersion>(text[0] - '0');
  throw InvariantError("unknown labeler version '" + std::string(text) + "'");
}

std::string version_name(LabelerVersion v) { return "v" + std::to_string(static_cast<int>(v)); }

MatchPolicy default_policy(LabelerVersion v) {
  switch (v) {
    case LabelerVersion::V1: return MatchPolicy::LastMatchSingle;
    case LabelerVersion::V2:
    case LabelerVersion::V3:
    case LabelerVersion::V4:
    case LabelerVersion::V5: return MatchPolicy::AllMatches;
    case LabelerVersion::V6: return MatchPolicy::Similarity;
    case LabelerVersion::V7:
    case LabelerVersion::V8: return MatchPolicy::SimilarityExactFirst;
  }
  return MatchPolicy::AllMatches;
}

RowMapping parse_row_mapping(std::string_view text) {
  if (text == "as-printed") return RowMapping::AsPrinted;
  if (text == "swapped-tn" || text == "swapped") return RowMapping::SwappedTN;
  throw InvariantError("unknown row mapping '" + std::string(text) + "'");
}

KeywordSections read_keyword_sections(std::istream& in) {
  KeywordSections out;
  std::optional<std::size_t> current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = strip_comment(line);
    if (s.empty()) continue;
    if (s.front() == '[' && s.back() == ']') {
      const std::string name = s.substr(1, s.size() - 2);
      current.reset();
      for (Intent c : kAllIntents)
        if (name == intent_name(c)) current = index_of(c);
      if (!current)
        throw FormatError("keyword file line " + std::to_string(line_no) + ": unknown section '" +
                          name + "'");
      continue;
    }
    if (!current)
      throw FormatError("keyword file line " + std::to_string(line_no) + ": phrase before any section");
    auto phrase = normalize_phrase(s);
    if (!phrase) continue;
    if (word_count(*phrase) > kMaxPhraseWords)
      throw FormatError("keyword file line " + std::to_string(line_no) + ": phrase longer than " +
                        std::to_string(kMaxPhraseWords) + " words");
    out.sections[*current].insert(*phrase);
  }
  return out;
}

void write_keyword_sections(std::ostream& out, const KeywordSections& s) {
  for (Intent c : kAllIntents) {
    out << '[' << intent_name(c) << "]\n";
    for (const auto& p : s.sections[index_of(c)]) out << p << '\n';
  }
}

std::set<std::string> read_word_list(std::istream& in) {
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string s = strip_comment(line);
    if (auto p = normalize_phrase(s)) out.insert(*p);
  }
  return out;
}

SynonymLexicon read_synonyms(std::istream& in) {
  SynonymLexicon out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = strip_comment(line);
    if (s.empty()) continue;
    const auto tab = s.find('\t');
    if (tab == std::string::npos)
      throw FormatError("synonym line " + std::to_string(line_no) + ": expected phrase<TAB>syn|syn");
    auto head = normalize_phrase(s.substr(0, tab));
    if (!head) continue;
    std::stringstream rest(s.substr(tab + 1));
    std::string item;
    while (std::getline(rest, item, '|')) {
      if (auto syn = normalize_phrase(item); syn && *syn != *head) out[*head].insert(*syn);
    }
  }
  return out;
}

void KeywordRuleSet::validate() const {
  for (const auto& set : phrases) {
    for (const auto& p : set) {
      if (p.empty()) throw InvariantError("empty phrase");
      if (std::any_of(p.begin(), p.end(), [](char c) { return c >= 'A' && c <= 'Z'; }))
        throw InvariantError("phrase '" + p + "' is not lowercase");
      if (word_count(p) > kMaxPhraseWords) throw InvariantError("phrase '" + p + "' is too long");
    }
  }
  if (policy == MatchPolicy::Similarity || policy == MatchPolicy::SimilarityExactFirst) {
    if (!embedding || !distance || !threshold)
      throw InvariantError("similarity matching needs an embedding, a distance and a threshold");
    if (*threshold < 0) throw InvariantError("similarity threshold must be >= 0");
  }
}

std::string KeywordRuleSet::canonical() const {
  std::ostringstream os;
  os << "version=" << version_name(version) << '\n';
  os << "policy=" << static_cast<int>(policy) << '\n';
  os << "row_mapping=" << (row_mapping == RowMapping::SwappedTN ? "swapped-tn" : "as-printed") << '\n';
  for (Intent c : kAllIntents) {
    os << '[' << intent_name(c) << "]\n";
    for (const auto& p : phrases[index_of(c)]) os << p << '\n';
  }
  os << "[stopwords]\n";
  for (const auto& w : stopwords) os << w << '\n';
  os << "[synonyms]\n";
  for (const auto& [k, v] : synonyms) {
    os << k << '\t';
    for (const auto& s : v) os << s << '|';
    os << '\n';
  }
  os << "[exclusions]\n";
  for (const auto& w : similarity_exclusions) os << w << '\n';
  if (distance) os << "distance=" << distance_name(*distance) << '\n';
  if (threshold) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *threshold);
    os << "threshold=" << buf << '\n';
  }
  if (embedding) {
    os << "embedding=" << embedding->size() << 'x' << embedding->dim()
       << (embedding->kind() == EmbeddingKind::OneHot ? ":one-hot" : ":pretrained") << '\n';
  }
  return os.str();
}

KeywordRuleSet make_rule_set(LabelerVersion version, const KeywordSections& sections,
                             RowMapping mapping) {
  KeywordRuleSet r;
  r.version = version;
  r.policy = default_policy(version);
  r.row_mapping = mapping;
  r.phrases = sections.sections;
  if (mapping == RowMapping::SwappedTN)
    std::swap(r.phrases[index_of(Intent::Transactional)], r.phrases[index_of(Intent::Navigational)]);
  return r;
}

std::array<PhraseSet, kNumIntents> expand_synonyms(const std::array<PhraseSet, kNumIntents>& sets,
                                                   const SynonymLexicon& synonyms,
                                                   const std::set<std::string>& stopwords) {
  std::map<std::string, std::set<std::string>> related;
  for (const auto& [head, syns] : synonyms) {
    for (const auto& s : syns) {
      related[head].insert(s);
      related[s].insert(head);
    }
  }
  auto out = sets;
  for (std::size_t c = 0; c < kNumIntents; ++c) {
    for (const auto& p : sets[c]) {
      auto it = related.find(p);
      if (it == related.end()) continue;
      for (const auto& s : it->second) {
        if (word_count(s) > kMaxPhraseWords || stopwords.count(s)) continue;
        out[c].insert(s);
      }
    }
  }
  return out;
}

std::array<std::vector<std::string>, kNumIntents> top_words_per_intent(
    const std::vector<std::pair<std::vector<std::string>, MultiHotLabel>>& labeled,
    const std::set<std::string>& stopwords, std::size_t k) {
  std::array<std::unordered_map<std::string, std::size_t>, kNumIntents> counts;
  for (const auto& [tokens, label] : labeled) {
    std::set<std::string> distinct(tokens.begin(), tokens.end());
    for (const auto& t : distinct) {
      if (stopwords.count(t)) continue;
      for (std::size_t c = 0; c < kNumIntents; ++c)
        if (label.bits()[c]) ++counts[c][t];
    }
  }
  std::array<std::vector<std::string>, kNumIntents> out;
  for (std::size_t c = 0; c < kNumIntents; ++c) {
    std::vector<std::pair<std::string, std::size_t>> ranked(counts[c].begin(), counts[c].end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out[c].push_back(ranked[i].first);
  }
  return out;
}

void merge_top_words(KeywordRuleSet& rules,
                     const std::array<std::vector<std::string>, kNumIntents>& top) {
  for (std::size_t c = 0; c < kNumIntents; ++c)
    rules.phrases[c].insert(top[c].begin(), top[c].end());
}

}  // namespace qintent

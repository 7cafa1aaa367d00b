#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "qintent/error.hpp"
#include "qintent/rules.hpp"

using namespace qintent;

namespace {

KeywordSections sections_from(const std::string& text) {
  std::istringstream in(text);
  return read_keyword_sections(in);
}

KeywordSections load_file(const std::string& name) {
  std::ifstream in(std::string(QINTENT_DATA_DIR) + "/rules/" + name);
  if (!in) throw std::runtime_error("missing " + name);
  return read_keyword_sections(in);
}

}  // namespace

TEST(KeywordFile, SectionsAndNormalization) {
  const auto s = sections_from(
      "# comment\n[informational]\nHow To   # trailing\nwhat\n\n[navigational]\nLogin!\n[transactional]\nbuy\n");
  EXPECT_EQ(s.sections[0], (PhraseSet{"how to", "what"}));
  EXPECT_EQ(s.sections[1], (PhraseSet{"buy"}));
  EXPECT_EQ(s.sections[2], (PhraseSet{"login"}));
}

TEST(KeywordFile, Errors) {
  EXPECT_THROW(sections_from("buy\n"), FormatError);
  EXPECT_THROW(sections_from("[commercial]\nbuy\n"), FormatError);
  EXPECT_THROW(sections_from("[informational]\na b c d e\n"), FormatError);
  EXPECT_NO_THROW(sections_from("[informational]\na b c d\n"));
}

TEST(KeywordFile, WriteReadRoundTrip) {
  const auto s = load_file("v4.kws");
  std::stringstream buf;
  write_keyword_sections(buf, s);
  const auto back = read_keyword_sections(buf);
  EXPECT_EQ(back.sections, s.sections);
}

TEST(KeywordFile, ShippedTablesKeepPrintedSpellings) {
  const auto v4 = load_file("v4.kws");
  bool picutre = false;
  for (const auto& set : v4.sections) picutre |= set.count("picutre") > 0;
  EXPECT_TRUE(picutre);
  for (const auto& set : load_file("v1.kws").sections) EXPECT_FALSE(set.empty());
}

TEST(RuleSet, RowMappingSwapsTransactionalAndNavigational) {
  const auto s = sections_from("[transactional]\nlogin\n[navigational]\nbuy\n");
  const auto swapped = make_rule_set(LabelerVersion::V4, s, RowMapping::SwappedTN);
  EXPECT_TRUE(swapped.phrases[index_of(Intent::Transactional)].count("buy"));
  EXPECT_TRUE(swapped.phrases[index_of(Intent::Navigational)].count("login"));
  const auto printed = make_rule_set(LabelerVersion::V4, s, RowMapping::AsPrinted);
  EXPECT_TRUE(printed.phrases[index_of(Intent::Transactional)].count("login"));
}

TEST(RuleSet, DefaultPolicies) {
  EXPECT_EQ(default_policy(LabelerVersion::V1), MatchPolicy::LastMatchSingle);
  for (auto v : {LabelerVersion::V2, LabelerVersion::V3, LabelerVersion::V4, LabelerVersion::V5})
    EXPECT_EQ(default_policy(v), MatchPolicy::AllMatches);
  EXPECT_EQ(default_policy(LabelerVersion::V6), MatchPolicy::Similarity);
  EXPECT_EQ(default_policy(LabelerVersion::V7), MatchPolicy::SimilarityExactFirst);
  EXPECT_EQ(default_policy(LabelerVersion::V8), MatchPolicy::SimilarityExactFirst);
  EXPECT_EQ(parse_version("V7"), LabelerVersion::V7);
  EXPECT_EQ(parse_version("3"), LabelerVersion::V3);
  EXPECT_THROW(parse_version("v9"), InvariantError);
  EXPECT_THROW(parse_row_mapping("sideways"), InvariantError);
}

TEST(RuleSet, ValidateRejectsBadRules) {
  KeywordRuleSet r;
  r.phrases[0] = {"Upper"};
  EXPECT_THROW(r.validate(), InvariantError);
  r.phrases[0] = {"a b c d e"};
  EXPECT_THROW(r.validate(), InvariantError);
  r.phrases[0] = {"ok"};
  r.policy = MatchPolicy::Similarity;
  EXPECT_THROW(r.validate(), InvariantError);
  r.embedding = std::make_shared<EmbeddingTable>(EmbeddingTable::pretrained(2));
  r.distance = DistanceKind::L1;
  r.threshold = -1;
  EXPECT_THROW(r.validate(), InvariantError);
  r.threshold = 0;
  EXPECT_NO_THROW(r.validate());
}

TEST(RuleSet, CanonicalIsStableAndSensitive) {
  const auto s = load_file("v4.kws");
  const auto a = make_rule_set(LabelerVersion::V4, s);
  const auto b = make_rule_set(LabelerVersion::V4, s);
  EXPECT_EQ(a.canonical(), b.canonical());
  auto c = b;
  c.stopwords.insert("the");
  EXPECT_NE(a.canonical(), c.canonical());
  EXPECT_NE(a.canonical(), make_rule_set(LabelerVersion::V4, s, RowMapping::AsPrinted).canonical());
}

TEST(Synonyms, ParseAndExpandSymmetrically) {
  std::istringstream in("buy\tpurchase|Acquire\nlogin\tsign in|log in\nhelp\tthe\nfar\ta b c d e\n");
  const auto lex = read_synonyms(in);
  EXPECT_EQ(lex.at("buy"), (std::set<std::string>{"acquire", "purchase"}));
  std::array<PhraseSet, kNumIntents> sets;
  sets[1] = {"purchase"};  // reached only through the reverse direction
  sets[2] = {"login"};
  sets[0] = {"help", "far"};
  const auto out = expand_synonyms(sets, lex, {"the"});
  EXPECT_TRUE(out[1].count("buy"));
  EXPECT_FALSE(out[1].count("acquire"));  // synonyms of synonyms are not followed
  EXPECT_TRUE(out[2].count("sign in"));
  EXPECT_TRUE(out[2].count("log in"));
  EXPECT_FALSE(out[0].count("the"));
  EXPECT_FALSE(out[0].count("a b c d e"));
  // expansion only adds
  for (std::size_t c = 0; c < 3; ++c)
    for (const auto& p : sets[c]) EXPECT_TRUE(out[c].count(p));
}

TEST(Synonyms, ShippedLexiconParses) {
  std::ifstream in(QINTENT_DATA_DIR "/synonyms_v5.txt");
  ASSERT_TRUE(in);
  EXPECT_FALSE(read_synonyms(in).empty());
  std::ifstream sw(QINTENT_DATA_DIR "/stopwords_en.txt");
  const auto stop = read_word_list(sw);
  EXPECT_EQ(stop.size(), 179u);
  EXPECT_TRUE(stop.count("when"));
}

TEST(TopWords, FrequencyThenAlphabetical) {
  std::vector<std::pair<std::vector<std::string>, MultiHotLabel>> labeled = {
      {{"cheap", "flights", "the"}, MultiHotLabel::single(Intent::Transactional)},
      {{"cheap", "cheap", "hotel"}, MultiHotLabel::single(Intent::Transactional)},
      {{"flights", "info"}, MultiHotLabel({true, true, false})},
  };
  const auto top = top_words_per_intent(labeled, {"the"}, 2);
  EXPECT_EQ(top[1], (std::vector<std::string>{"cheap", "flights"}));
  EXPECT_EQ(top[0], (std::vector<std::string>{"flights", "info"}));
  EXPECT_TRUE(top[2].empty());
  KeywordRuleSet r;
  merge_top_words(r, top);
  EXPECT_TRUE(r.phrases[1].count("cheap"));
}

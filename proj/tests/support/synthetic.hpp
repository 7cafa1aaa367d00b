#pragma once

// Seeded synthetic worlds: a keyword world for the labeler and grid checks and
// a separable corpus for training.

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "oracle/labeler_oracle.hpp"
#include "qintent/embedding.hpp"
#include "qintent/gold.hpp"
#include "qintent/nn/tensor.hpp"
#include "qintent/rules.hpp"
#include "qintent/weak_label.hpp"

namespace support {

struct World {
  std::array<std::vector<std::string>, 3> sets;
  std::vector<std::string> stopwords;
  std::vector<std::pair<std::string, std::string>> synonyms;
  std::vector<std::string> exclusions;
  std::vector<std::string> vocabulary;  // every word that may appear in a query
  std::vector<std::map<std::string, std::vector<double>>> embeddings;
  std::vector<std::vector<std::string>> queries;
};

inline std::vector<double> noisy(const std::vector<double>& base, qintent::nn::Rng& rng, double eps) {
  auto v = base;
  for (auto& x : v) x += rng.uniform(-eps, eps);
  return v;
}

/// Word roles: iK/tK/nK are keywords, iKn/tKn/nKn sit close to one in embedding
/// space, wK are filler, "the"/"of"/"to"/"for" are stopwords, zK have no vector.
/// Phrases run up to four words, one unigram is listed under two intents, some
/// unigram keywords are also prefixes of longer phrases in another intent, and
/// "for" is both a stopword and a keyword.
inline World make_world(std::uint64_t seed = 2024, std::size_t n_queries = 200) {
  World w;
  qintent::nn::Rng rng(seed);
  const char* prefixes[3] = {"i", "t", "n"};
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 6; ++k) w.sets[c].push_back(prefixes[c] + std::to_string(k));
  w.sets[0].push_back("i0 w1");
  w.sets[0].push_back("w2 w3 w4");
  w.sets[1].push_back("t1 w5 the w6");
  w.sets[1].push_back("i2 w7");  // shadows the informational unigram i2
  w.sets[2].push_back("n1 of");
  w.sets[2].push_back("w8 w9 w10 w11");
  w.sets[0].push_back("m0");
  w.sets[1].push_back("m0");
  w.sets[1].push_back("for");
  w.stopwords = {"the", "of", "to", "for"};
  w.synonyms = {{"i1", "s1"},          {"s2", "t3"},  {"n4", "s3 s4"}, {"i5", "the"},
                {"t5", "s5 s6 s7 s8 s9"}, {"n2", "s6"}, {"w12", "s7"}};
  w.exclusions = {"i3", "n5"};

  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 6; ++k) {
      const std::string base = prefixes[c] + std::to_string(k);
      w.vocabulary.push_back(base);
      w.vocabulary.push_back(base + "n");
    }
  for (int k = 0; k < 14; ++k) w.vocabulary.push_back("w" + std::to_string(k));
  for (int k = 1; k < 10; ++k) w.vocabulary.push_back("s" + std::to_string(k));
  for (const auto& s : w.stopwords) w.vocabulary.push_back(s);
  w.vocabulary.push_back("m0");
  w.vocabulary.push_back("zero");
  for (int k = 0; k < 3; ++k) w.vocabulary.push_back("z" + std::to_string(k));

  for (int e = 0; e < 2; ++e) {
    std::map<std::string, std::vector<double>> table;
    for (const auto& word : w.vocabulary) {
      if (word.front() == 'z') continue;  // out of vocabulary
      if (word == "zero") {
        table[word] = std::vector<double>(4, 0.0);
        continue;
      }
      if (word.size() > 2 && word.back() == 'n' && table.count(word.substr(0, word.size() - 1))) {
        // neighbours: larger spread in the second embedding
        table[word] = noisy(table[word.substr(0, word.size() - 1)], rng, e == 0 ? 0.15 : 0.4);
        continue;
      }
      std::vector<double> v(4);
      for (auto& x : v) x = rng.uniform(-1, 1);
      table[word] = v;
    }
    w.embeddings.push_back(std::move(table));
  }

  // Queries mix keyword-heavy fragments with filler so every rule path is hit.
  const std::vector<std::vector<std::string>> fragments = {
      {"i0", "w1"},        {"w2", "w3", "w4"},      {"t1", "w5", "the", "w6"}, {"i2", "w7"},
      {"n1", "of"},        {"w8", "w9", "w10", "w11"}, {"m0"}, {"for"}, {"s3", "s4"},
      {"s5", "s6", "s7", "s8"}, {"w2", "w3"}, {"t1", "w5"}};
  for (std::size_t q = 0; q < n_queries; ++q) {
    std::vector<std::string> tokens;
    const std::size_t len = 1 + rng.below(6);
    while (tokens.size() < len) {
      if (rng.below(4) == 0) {
        const auto& f = fragments[rng.below(fragments.size())];
        tokens.insert(tokens.end(), f.begin(), f.end());
      } else {
        tokens.push_back(w.vocabulary[rng.below(w.vocabulary.size())]);
      }
    }
    w.queries.push_back(std::move(tokens));
  }
  return w;
}

inline std::shared_ptr<const qintent::EmbeddingTable> to_table(const std::map<std::string, std::vector<double>>& m) {
  auto t = std::make_shared<qintent::EmbeddingTable>(qintent::EmbeddingTable::pretrained(4));
  for (const auto& [word, v] : m) t->add(word, v);
  return t;
}

struct SimilarityParams {
  std::size_t embedding = 0;
  qintent::DistanceKind distance = qintent::DistanceKind::SquaredL2;
  double threshold = 0.1;
};

inline oracle::Dist to_oracle(qintent::DistanceKind k) {
  switch (k) {
    case qintent::DistanceKind::SquaredL2: return oracle::Dist::SqL2;
    case qintent::DistanceKind::L1: return oracle::Dist::L1;
    case qintent::DistanceKind::Cosine: return oracle::Dist::Cos;
  }
  return oracle::Dist::SqL2;
}

inline qintent::KeywordRuleSet library_rules(const World& w, int version, const SimilarityParams& sim = {},
                                             bool with_exclusions = false) {
  qintent::KeywordRuleSet r;
  r.version = static_cast<qintent::LabelerVersion>(version);
  r.policy = qintent::default_policy(r.version);
  for (int c = 0; c < 3; ++c) r.phrases[c] = qintent::PhraseSet(w.sets[c].begin(), w.sets[c].end());
  r.stopwords = std::set<std::string>(w.stopwords.begin(), w.stopwords.end());
  for (const auto& [a, b] : w.synonyms) r.synonyms[a].insert(b);
  if (version >= 6) {
    r.embedding = to_table(w.embeddings[sim.embedding]);
    r.distance = sim.distance;
    r.threshold = sim.threshold;
  }
  if (with_exclusions) r.similarity_exclusions = std::set<std::string>(w.exclusions.begin(), w.exclusions.end());
  return r;
}

inline oracle::Rules oracle_rules(const World& w, int version, const SimilarityParams& sim = {},
                                  bool with_exclusions = false) {
  oracle::Rules r;
  r.version = version;
  r.sets = w.sets;
  r.stopwords = w.stopwords;
  r.synonym_pairs = w.synonyms;
  r.vectors = w.embeddings[sim.embedding];
  r.dist = to_oracle(sim.distance);
  r.threshold = sim.threshold;
  if (with_exclusions) r.exclusions = w.exclusions;
  return r;
}

inline oracle::Bits to_bits(const std::optional<qintent::MultiHotLabel>& l) {
  if (!l) return {0, 0, 0};
  return {l->bits()[0], l->bits()[1], l->bits()[2]};
}

/// Gold labels for the world's queries: the intents of any keyword root present,
/// else a seeded random single intent.
inline qintent::GoldSet world_gold(const World& w, std::uint64_t seed = 99) {
  qintent::nn::Rng rng(seed);
  qintent::GoldSet g;
  g.name = "synthetic";
  for (std::size_t q = 0; q < w.queries.size(); ++q) {
    std::array<bool, 3> bits{};
    for (const auto& t : w.queries[q]) {
      if (t.size() >= 2 && (t[0] == 'i' || t[0] == 't' || t[0] == 'n') && std::isdigit(static_cast<unsigned char>(t[1])))
        bits[t[0] == 'i' ? 0 : t[0] == 't' ? 1 : 2] = true;
    }
    if (!bits[0] && !bits[1] && !bits[2]) bits[rng.below(3)] = true;
    g.entries.push_back({static_cast<std::int64_t>(q), w.queries[q],
                         qintent::IntentDistribution::uniform_over(qintent::MultiHotLabel(bits))});
  }
  return g;
}

/// Three disjoint vocabularies; every query draws 1-4 words from one of them
/// and carries that intent as a one-hot target.
inline std::vector<qintent::LabeledQuery> separable_corpus(std::size_t n = 200, std::uint64_t seed = 7,
                                                           std::size_t words_per_intent = 12) {
  qintent::nn::Rng rng(seed);
  const char* names[3] = {"info", "shop", "site"};
  std::vector<qintent::LabeledQuery> out;
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t c = q % 3;
    const std::size_t len = 1 + rng.below(4);
    qintent::LabeledQuery lq;
    for (std::size_t k = 0; k < len; ++k)
      lq.tokens.push_back(names[c] + std::to_string(rng.below(words_per_intent)));
    std::array<double, 3> w{};
    w[c] = 1.0;
    lq.target = qintent::IntentDistribution(w);
    out.push_back(std::move(lq));
  }
  return out;
}

/// One-hot vocabulary in first-appearance order.
inline qintent::EmbeddingTable corpus_vocabulary(const std::vector<qintent::LabeledQuery>& corpus) {
  std::vector<std::string> words;
  std::set<std::string> seen;
  for (const auto& q : corpus)
    for (const auto& t : q.tokens)
      if (seen.insert(t).second) words.push_back(t);
  return qintent::EmbeddingTable::one_hot(words);
}

}  // namespace support

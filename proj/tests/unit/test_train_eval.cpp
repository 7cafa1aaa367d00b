#include <gtest/gtest.h>

#include <set>

#include "qintent/error.hpp"
#include "qintent/train_eval.hpp"
#include "support/metric_check.hpp"
#include "support/training_check.hpp"

using namespace qintent;

namespace {

IntentDistribution dist(double a, double b, double c) { return IntentDistribution({a, b, c}); }

}  // namespace

TEST(Split, SeededPartition) {
  const auto corpus = support::separable_corpus(23, 1);
  const auto a = split(corpus, {5, 0.8}), b = split(corpus, {5, 0.8});
  EXPECT_EQ(a.train.size(), 18u);  // floor(0.8 * 23)
  EXPECT_EQ(a.validation.size(), 5u);
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].tokens, b.train[i].tokens);
  const auto c = split(corpus, {6, 0.8});
  bool differs = false;
  for (std::size_t i = 0; i < a.train.size(); ++i) differs |= a.train[i].tokens != c.train[i].tokens;
  EXPECT_TRUE(differs);
  std::multiset<std::string> all, parts;
  for (const auto& q : corpus) all.insert(join_tokens(q.tokens));
  for (const auto& q : a.train) parts.insert(join_tokens(q.tokens));
  for (const auto& q : a.validation) parts.insert(join_tokens(q.tokens));
  EXPECT_EQ(all, parts);
  EXPECT_THROW(split(support::separable_corpus(4, 1), {0, 0.8}), InvariantError);
  EXPECT_THROW(split(corpus, {0, 1.0}), InvariantError);
}

TEST(Metric, ThresholdTable) {
  EXPECT_EQ(accuracy_threshold(1), 0.5);
  EXPECT_EQ(accuracy_threshold(2), 0.25);
  EXPECT_EQ(accuracy_threshold(3), 0.16);
  EXPECT_THROW(accuracy_threshold(0), InvariantError);
}

TEST(Metric, StrictComparisons) {
  EXPECT_EQ(multi_modal_accuracy(dist(0.5, 0.5, 0), dist(1, 0, 0)), 0);
  EXPECT_EQ(multi_modal_accuracy(dist(0.51, 0.49, 0), dist(1, 0, 0)), 1);
  EXPECT_EQ(multi_modal_accuracy(dist(0.25, 0.5, 0.25), dist(0.5, 0, 0.5)), 0);
  EXPECT_EQ(multi_modal_accuracy(dist(0.26, 0.48, 0.26), dist(0.5, 0, 0.5)), 1);
  EXPECT_EQ(multi_modal_accuracy(dist(0.17, 0.17, 0.66), dist(1.0 / 3, 1.0 / 3, 1.0 / 3)), 1);
  EXPECT_EQ(multi_modal_accuracy(dist(0.16, 0.17, 0.67), dist(1.0 / 3, 1.0 / 3, 1.0 / 3)), 0);
}

TEST(Metric, ExhaustiveSimplexGrid) {
  const auto d = support::check_metric_grid();
  EXPECT_EQ(d.checked, 7u * 5151u);
  EXPECT_EQ(d.disagreements, 0u);
}

// Permuting the classes of both prediction and target never changes the score.
TEST(Metric, InvariantUnderClassPermutation) {
  nn::Rng rng(3);
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int trial = 0; trial < 2000; ++trial) {
    double a = rng.uniform01(), b = rng.uniform01() * (1 - a);
    const std::array<double, 3> y = {a, b, 1 - a - b};
    const auto mask = 1 + rng.below(7);
    const auto t = IntentDistribution::uniform_over(MultiHotLabel({(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0}));
    const int base = multi_modal_accuracy(IntentDistribution(y), t);
    for (const auto& p : perms) {
      const IntentDistribution yp({y[p[0]], y[p[1]], y[p[2]]});
      const IntentDistribution tp({t[p[0]], t[p[1]], t[p[2]]});
      EXPECT_EQ(multi_modal_accuracy(yp, tp), base);
    }
  }
}

TEST(Train, SeparableCorpusIsLearnedDeterministically) {
  const auto a = support::train_separable(11, 20);
  EXPECT_FALSE(a.result.diverged);
  EXPECT_GE(a.best_val_accuracy, 95.0);
  EXPECT_EQ(a.result.history.size(), 20u);
  const auto b = support::train_separable(11, 20);
  EXPECT_EQ(a.result.best.hash(), b.result.best.hash());
  EXPECT_EQ(a.result.best.epoch, b.result.best.epoch);
}

TEST(Train, BestEpochIsTheReportedMaximum) {
  const auto r = support::train_separable(3, 6).result;
  double best = -1;
  for (const auto& e : r.history) best = std::max(best, e.val_accuracy);
  EXPECT_EQ(r.best.metrics.at("val_accuracy"), best);
  const double best_loss = r.best.metrics.at("val_loss");
  for (const auto& e : r.history) {
    if (e.val_accuracy != best || e.epoch == r.best.epoch) continue;
    EXPECT_TRUE(e.val_loss > best_loss || (e.val_loss == best_loss && e.epoch > r.best.epoch)) << e.epoch;
  }
}

TEST(Train, DivergenceStopsWithDiagnostic) {
  const auto corpus = support::separable_corpus(60, 2);
  const auto emb = support::corpus_vocabulary(corpus);
  const auto parts = split(corpus, {1, 0.8});
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.lr = 1e300;
  cfg.momentum = 0.5;
  const auto r = train(ModelSpec::reference(Arch::Rnn1, emb.dim(), 1), parts.train, parts.validation, emb, cfg);
  EXPECT_TRUE(r.diverged);
  EXPECT_FALSE(r.diagnostic.empty());
  for (const auto& [name, t] : r.best.params) EXPECT_TRUE(t.all_finite()) << name;
}

TEST(Train, RejectsMismatchedInputs) {
  const auto corpus = support::separable_corpus(20, 2);
  const auto emb = support::corpus_vocabulary(corpus);
  EXPECT_THROW(train(ModelSpec::reference(Arch::Rnn1, emb.dim() + 1), corpus, corpus, emb), InvariantError);
  EXPECT_THROW(train(ModelSpec::reference(Arch::Rnn1, emb.dim()), {}, corpus, emb), InvariantError);
}

TEST(Train, SkipsExamplesWithoutEmbeddedTokens) {
  auto corpus = support::separable_corpus(30, 2);
  const auto emb = support::corpus_vocabulary(corpus);
  corpus.push_back({{"never", "seen"}, IntentDistribution({1, 0, 0})});
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto r = train(ModelSpec::reference(Arch::Rnn1, emb.dim()), corpus, corpus, emb, cfg);
  EXPECT_EQ(r.skipped_train, 1u);
}

TEST(Evaluate, AbstentionsScoreZero) {
  const auto emb = EmbeddingTable::one_hot({"a", "b"});
  const auto model = build(ModelSpec::reference(Arch::Rnn1, 2, 1));
  GoldSet g;
  g.name = "g";
  g.entries = {{0, {"a"}, dist(1, 0, 0)}, {1, {"zz"}, dist(0, 1, 0)}};
  const auto r = evaluate(*model, g, emb);
  EXPECT_EQ(r.total, 2u);
  EXPECT_EQ(r.abstained, 1u);
  EXPECT_LE(r.accuracy, 50.0);
  const auto rows = predict_report(*model, g, emb);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(format_prediction_row(rows[1]), "zz\tn/a\tn/a\tn/a\t0.00\t1.00\t0.00");
}

TEST(EvaluateRules, CountsLabeledAndCorrect) {
  KeywordRuleSet r;
  r.version = LabelerVersion::V2;
  r.policy = MatchPolicy::AllMatches;
  r.phrases[1] = {"buy"};
  r.phrases[0] = {"how"};
  const Labeler lab(r);
  GoldSet g;
  g.name = "g";
  g.entries = {{0, {"buy", "x"}, dist(0, 1, 0)},
               {1, {"how", "buy"}, dist(0.5, 0.5, 0)},
               {2, {"how"}, dist(0, 0, 1)},
               {3, {"nothing"}, dist(1, 0, 0)}};
  const auto rep = evaluate_rules(lab, g);
  EXPECT_EQ(rep.total, 4u);
  EXPECT_EQ(rep.labeled, 3u);
  EXPECT_EQ(rep.correct, 2u);
  EXPECT_NEAR(rep.accuracy, 200.0 / 3, 1e-9);
  EXPECT_DOUBLE_EQ(rep.percent_labeled, 75.0);
  GoldSet none;
  none.entries = {{0, {"nothing"}, dist(1, 0, 0)}};
  EXPECT_TRUE(evaluate_rules(lab, none).accuracy_undefined);
}

TEST(Results, RowFormat) {
  ResultRow r{"first-100k", "v5", "rnn1", "one-hot", 81.234, 90.0, 7, "abc"};
  EXPECT_EQ(format_result_row(r), "first-100k\tv5\trnn1\tone-hot\t81.23%\t90.00%\t7\tabc");
  EXPECT_EQ(format_result_header(), "dataset\tlabeling\tmodel\tembedding\tgt2\tgt3\tepoch\tfingerprint");
}

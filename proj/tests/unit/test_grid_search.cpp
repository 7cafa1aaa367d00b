#include <gtest/gtest.h>

#include "qintent/error.hpp"
#include "qintent/grid_search.hpp"
#include "support/grid_check.hpp"

using namespace qintent;

namespace {
const std::vector<DistanceKind> kAll = {DistanceKind::SquaredL2, DistanceKind::L1, DistanceKind::Cosine};
}

TEST(Hamming, CountsPerClass) {
  const auto gold = IntentDistribution({0.5, 0, 0.5});
  EXPECT_EQ(hamming_distance(MultiHotLabel({true, false, true}), gold), 0u);
  EXPECT_EQ(hamming_distance(MultiHotLabel({false, true, false}), gold), 3u);
  EXPECT_EQ(hamming_distance(std::nullopt, gold), 2u);
}

TEST(GridSearch, MatchesBruteForce) {
  const auto w = support::make_world();
  const auto d = support::compare_grid(w, kAll, {0.05, 0.2, 0.5, 1.0});
  EXPECT_EQ(d.cells, 24u);
  EXPECT_EQ(d.mismatches, 0u) << d.first;
  EXPECT_TRUE(d.same_winner);
}

TEST(GridSearch, ParallelAndOtherWorlds) {
  for (std::uint64_t seed : {5u, 6u}) {
    const auto w = support::make_world(seed, 120);
    const auto d = support::compare_grid(w, kAll, {0.0, 0.1, 0.7, 3.0}, 4);
    EXPECT_EQ(d.mismatches, 0u) << d.first;
    EXPECT_TRUE(d.same_winner);
  }
}

TEST(GridSearch, SortedAndReported) {
  const auto w = support::make_world();
  const auto gold = support::world_gold(w);
  std::vector<NamedEmbedding> embs = {{"a", support::to_table(w.embeddings[0])}};
  const auto pts = grid_search_v8(gold, embs, kAll, {0.5, 0.1}, support::library_rules(w, 5));
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LE(pts[i - 1].hamming, pts[i].hamming);
  const auto report = format_grid_report(pts);
  EXPECT_EQ(report.substr(0, report.find('\n')), "embedding\tdistance\tthreshold\thamming\tpercent_labeled");
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 7);
  EXPECT_THROW(grid_search_v8(gold, {}, kAll, {0.1}, support::library_rules(w, 5)), InvariantError);
}

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qintent/embedding.hpp"
#include "qintent/gold.hpp"
#include "qintent/rules.hpp"

namespace qintent {

struct NamedEmbedding {
  std::string name;
  std::shared_ptr<const EmbeddingTable> table;
};

struct GridPoint {
  std::size_t embedding_index = 0;
  std::string embedding_name;
  std::size_t kind_index = 0;
  DistanceKind kind = DistanceKind::SquaredL2;
  double threshold = 0;
  std::size_t hamming = 0;
  std::size_t labeled = 0;
  double percent_labeled = 0;
};

/// Per-class disagreements between a rule label and the binarized gold
/// distribution. An unlabeled query disagrees on every gold-positive class.
std::size_t hamming_distance(const std::optional<MultiHotLabel>& predicted,
                             const IntentDistribution& gold);

/// Scores every (embedding, distance, threshold) with similarity-exact-first
/// rules derived from `base`. Sorted by hamming, then embedding order, distance
/// order and smaller threshold.
std::vector<GridPoint> grid_search_v8(const GoldSet& gold,
                                      const std::vector<NamedEmbedding>& embeddings,
                                      const std::vector<DistanceKind>& kinds,
                                      const std::vector<double>& thresholds,
                                      const KeywordRuleSet& base, std::size_t jobs = 1);

/// Delimited report: embedding, distance, threshold, hamming, percent-labeled.
std::string format_grid_report(const std::vector<GridPoint>& points, char delimiter = '\t');

}  // namespace qintent

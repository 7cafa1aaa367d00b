#include "qintent/grid_search.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "qintent/error.hpp"
#include "qintent/parallel.hpp"
#include "qintent/weak_label.hpp"

namespace qintent {

std::size_t hamming_distance(const std::optional<MultiHotLabel>& predicted,
                             const IntentDistribution& gold) {
  std::size_t d = 0;
  for (std::size_t c = 0; c < kNumIntents; ++c) {
    const bool g = gold[c] > 0;
    const bool p = predicted ? predicted->bits()[c] : false;
    d += g != p;
  }
  return d;
}

std::vector<GridPoint> grid_search_v8(const GoldSet& gold,
                                      const std::vector<NamedEmbedding>& embeddings,
                                      const std::vector<DistanceKind>& kinds,
                                      const std::vector<double>& thresholds,
                                      const KeywordRuleSet& base, std::size_t jobs) {
  if (embeddings.empty() || kinds.empty() || thresholds.empty())
    throw InvariantError("grid search needs at least one embedding, distance and threshold");
  for (const auto& e : embeddings)
    if (!e.table) throw InvariantError("grid embedding '" + e.name + "' is not loaded");

  struct Cell {
    std::size_t e, k, t;
  };
  std::vector<Cell> cells;
  for (std::size_t e = 0; e < embeddings.size(); ++e)
    for (std::size_t k = 0; k < kinds.size(); ++k)
      for (std::size_t t = 0; t < thresholds.size(); ++t) cells.push_back({e, k, t});

  auto points = parallel_map(cells.size(), jobs, [&](std::size_t i) {
    const Cell& cell = cells[i];
    KeywordRuleSet rules = base;
    rules.version = LabelerVersion::V8;
    rules.policy = MatchPolicy::SimilarityExactFirst;
    rules.embedding = embeddings[cell.e].table;
    rules.distance = kinds[cell.k];
    rules.threshold = thresholds[cell.t];
    const Labeler labeler(std::move(rules));

    GridPoint p;
    p.embedding_index = cell.e;
    p.embedding_name = embeddings[cell.e].name;
    p.kind_index = cell.k;
    p.kind = kinds[cell.k];
    p.threshold = thresholds[cell.t];
    for (const auto& entry : gold.entries) {
      const auto label = labeler.label(entry.tokens);
      p.labeled += label.has_value();
      p.hamming += hamming_distance(label, entry.target);
    }
    p.percent_labeled = gold.entries.empty() ? 0.0 : 100.0 * p.labeled / gold.entries.size();
    return p;
  });

  std::stable_sort(points.begin(), points.end(), [](const GridPoint& a, const GridPoint& b) {
    return std::tie(a.hamming, a.embedding_index, a.kind_index, a.threshold) <
           std::tie(b.hamming, b.embedding_index, b.kind_index, b.threshold);
  });
  return points;
}

std::string format_grid_report(const std::vector<GridPoint>& points, char delimiter) {
  std::ostringstream os;
  os << "embedding" << delimiter << "distance" << delimiter << "threshold" << delimiter << "hamming"
     << delimiter << "percent_labeled\n";
  char buf[64];
  for (const auto& p : points) {
    os << p.embedding_name << delimiter << distance_name(p.kind) << delimiter;
    std::snprintf(buf, sizeof buf, "%g", p.threshold);
    os << buf << delimiter << p.hamming << delimiter;
    std::snprintf(buf, sizeof buf, "%.2f", p.percent_labeled);
    os << buf << '\n';
  }
  return os.str();
}

}  // namespace qintent

#pragma once

// The seven printed annotation rows and their expected aggregates.

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qintent/corpus.hpp"
#include "qintent/gold.hpp"

namespace support {

struct Table3Row {
  std::int64_t id;
  std::string text;
  std::optional<std::array<double, 3>> gt2, gt3;  // nullopt = n/a
};

inline const std::vector<Table3Row>& table3_expected() {
  static const std::vector<Table3Row> rows = {
      {0, "map of maine towns", {{0, 0, 1}}, {{0, 0, 1}}},
      {1, "what to do hervey bay", {{0.5, 0, 0.5}}, std::nullopt},
      {2, "when is the best time to fish", {{1, 0, 0}}, {{1, 0, 0}}},
      {3, "ex demo cars for sale", {{0, 1, 0}}, {{0, 1, 0}}},
      {4, "new homes for sale bournemouth", {{0, 0.5, 0.5}}, std::nullopt},
      {5, "australia inheritance tax", {{1, 0, 0}}, std::nullopt},
      {6, "banking for you", std::nullopt, std::nullopt},
  };
  return rows;
}

inline qintent::GoldBuild table3_build() {
  std::ifstream ann(QINTENT_DATA_DIR "/fixtures/table3_annotations.tsv");
  std::ifstream q(QINTENT_DATA_DIR "/fixtures/table3_queries.tsv");
  if (!ann || !q) throw std::runtime_error("table 3 fixture missing");
  return qintent::build_gold(qintent::read_annotations(ann), qintent::read_query_texts(q));
}

/// Returns one message per cell that differs; empty means every cell matches.
inline std::vector<std::string> table3_mismatches(const qintent::GoldBuild& b) {
  std::vector<std::string> out;
  auto check = [&](const qintent::GoldSet& set, std::int64_t id,
                   const std::optional<std::array<double, 3>>& want, const std::string& tag) {
    const auto got = set.find(id);
    if (!want) {
      if (got) out.push_back(tag + " query " + std::to_string(id) + ": expected n/a");
      if (!set.excluded.count(id)) out.push_back(tag + " query " + std::to_string(id) + ": no exclusion reason");
      return;
    }
    if (!got) {
      out.push_back(tag + " query " + std::to_string(id) + ": missing");
      return;
    }
    for (std::size_t c = 0; c < 3; ++c)
      if (got->target[c] != (*want)[c])
        out.push_back(tag + " query " + std::to_string(id) + " class " + std::to_string(c) + ": got " +
                      std::to_string(got->target[c]));
  };
  for (const auto& row : table3_expected()) {
    check(b.gt2, row.id, row.gt2, "GT-2");
    check(b.gt3, row.id, row.gt3, "GT-3");
    if (auto e = b.gt2.find(row.id); e && qintent::join_tokens(e->tokens) != row.text)
      out.push_back("query " + std::to_string(row.id) + ": tokens differ");
  }
  if (!b.validation.empty()) out.push_back("unexpected validation failures");
  if (b.gt2.entries.size() != 6 || b.gt3.entries.size() != 3) out.push_back("wrong entry counts");
  return out;
}

}  // namespace support

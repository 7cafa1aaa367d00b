// One line per acceptance criterion; exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "qintent/corpus.hpp"
#include "qintent/models.hpp"
#include "qintent/nn/layers.hpp"
#include "qintent/nn/loss.hpp"
#include "support/gradient_suite.hpp"
#include "support/grid_check.hpp"
#include "support/labeler_check.hpp"
#include "support/metric_check.hpp"
#include "support/param_counts.hpp"
#include "support/table3.hpp"
#include "support/training_check.hpp"

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome param_counts() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t bad = 0;
  std::string first;
  for (const auto& c : support::published_counts()) {
    const auto got = qintent::count_params(qintent::ModelSpec::reference(c.arch, c.input_dim));
    if (got != c.expected && bad++ == 0)
      first = qintent::arch_name(c.arch) + " E=" + std::to_string(c.input_dim) + " got " + std::to_string(got);
  }
  const double s = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "9 cells, %zu wrong, %.3fs", bad, s);
  return {bad == 0 && s < 1.0, buf + (first.empty() ? "" : "; " + first)};
}

Outcome table3() {
  const auto bad = support::table3_mismatches(support::table3_build());
  return {bad.empty(), bad.empty() ? "all GT-2/GT-3 cells match" : bad.front()};
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  auto cases = support::layer_gradient_cases();
  for (auto& c : support::model_gradient_cases()) cases.push_back(std::move(c));
  double worst = 0;
  std::string where;
  for (const auto& c : cases)
    if (c.result.max_rel > worst) {
      worst = c.result.max_rel;
      where = c.name + ":" + c.result.worst;
    }
  const double s = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu cases, max rel error %.2e at %s, %.2fs", cases.size(), worst, where.c_str(), s);
  return {worst <= 1e-4 && s < 30.0, buf};
}

Outcome metric_grid() {
  const auto d = support::check_metric_grid();
  return {d.disagreements == 0 && d.checked > 0,
          std::to_string(d.checked) + " points, " + std::to_string(d.disagreements) + " disagreements"};
}

Outcome labeler_oracle() {
  const auto w = support::make_world();
  std::size_t mismatches = 0, compared = 0;
  std::string first;
  for (const auto& cfg : support::labeler_configs()) {
    const auto d = support::compare_with_oracle(w, cfg);
    compared += d.compared;
    if (d.mismatches && first.empty()) first = d.first;
    mismatches += d.mismatches;
  }
  const std::size_t degenerate = support::v6_zero_vs_v5(w);
  std::string detail = std::to_string(w.queries.size()) + " queries x " + std::to_string(support::labeler_configs().size()) +
                       " settings, " + std::to_string(mismatches) + " mismatches; v6(0) vs v5 differ on " +
                       std::to_string(degenerate);
  if (!first.empty()) detail += "; first " + first;
  return {mismatches == 0 && degenerate == 0 && compared > 0, detail};
}

Outcome grid() {
  using qintent::DistanceKind;
  const auto d = support::compare_grid(support::make_world(),
                                       {DistanceKind::SquaredL2, DistanceKind::L1, DistanceKind::Cosine},
                                       {0.05, 0.2, 0.5, 1.0});
  return {d.cells == 24 && d.mismatches == 0 && d.same_winner,
          std::to_string(d.cells) + " cells, " + std::to_string(d.mismatches) + " mismatches, winner " +
              (d.same_winner ? "same" : "differs") + (d.first.empty() ? "" : "; " + d.first)};
}

Outcome training() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = support::train_separable(11, 20);
  const auto b = support::train_separable(11, 20);
  const double s = seconds_since(t0);
  const bool same = a.result.best.hash() == b.result.best.hash();
  char buf[200];
  std::snprintf(buf, sizeof buf, "val accuracy %.2f%% (epoch %zu), hashes %s, %.1fs", a.best_val_accuracy,
                a.result.best.epoch, same ? "identical" : "differ", s);
  return {a.best_val_accuracy >= 95.0 && same && !a.result.diverged && s < 120.0, buf};
}

Outcome loss_properties() {
  qintent::nn::Rng rng(1234);
  auto draw = [&](bool sparse) {
    std::vector<double> p(3);
    double sum = 0;
    for (auto& v : p) {
      v = rng.uniform01();
      if (sparse && rng.below(3) == 0) v = 0;
      sum += v;
    }
    if (sum == 0) {
      p[rng.below(3)] = 1;
      sum = 1;
    }
    for (auto& v : p) v /= sum;
    return p;
  };
  std::size_t violations = 0, equality_errors = 0;
  double max_norm_err = 0;
  for (int i = 0; i < 10000; ++i) {
    // y keeps full support so the cross-entropy is finite; t may be sparse.
    auto y = draw(false);
    const auto t = draw(true);
    if (i % 10 == 0) y = t;  // exercise the equality case
    bool full = true;
    for (double v : y) full &= v > 0;
    if (!full) y = draw(false);
    const double ce = qintent::nn::cross_entropy(y, t), h = qintent::nn::entropy(t);
    const bool equal = y == t;
    if (ce < h - 1e-12) ++violations;
    if (equal != (std::abs(ce - h) <= 1e-12)) ++equality_errors;
    std::vector<double> z(3);
    for (auto& v : z) v = rng.uniform(-30, 30);
    const auto s = qintent::nn::softmax(z);
    max_norm_err = std::max(max_norm_err, std::abs(s[0] + s[1] + s[2] - 1.0));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "10000 pairs, %zu below entropy, %zu equality errors, softmax norm error %.1e",
                violations, equality_errors, max_norm_err);
  return {violations == 0 && equality_errors == 0 && max_norm_err <= 1e-12, buf};
}

Outcome corpus_round_trip() {
  std::ifstream in(QINTENT_DATA_DIR "/fixtures/corpus_1000.csv");
  if (!in) return {false, "fixture missing"};
  std::size_t skipped = 0;
  const auto recs = qintent::parse_csv(in, ',', &skipped);
  qintent::VectorRecordStream stream(recs);
  const auto slice = qintent::slice_first_n(stream, recs.size());
  std::stringstream buf;
  qintent::write_manifest(buf, slice);
  const auto back = qintent::read_manifest(buf);
  const bool identical = back == slice;
  return {recs.size() == 1000 && identical && slice.reconciles() && back.reconciles(),
          std::to_string(recs.size()) + " rows, kept " + std::to_string(slice.records.size()) + ", dropped " +
              std::to_string(slice.dropped()) + ", reload " + (identical ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"parameter-counts", param_counts},     {"table3-fixture", table3},
      {"gradient-suite", gradients},          {"metric-suite", metric_grid},
      {"labeler-oracle", labeler_oracle},     {"grid-search-oracle", grid},
      {"training-sanity", training},          {"loss-properties", loss_properties},
      {"corpus-round-trip", corpus_round_trip}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %-20s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

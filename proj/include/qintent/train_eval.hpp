#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qintent/checkpoint.hpp"
#include "qintent/embedding.hpp"
#include "qintent/gold.hpp"
#include "qintent/models.hpp"
#include "qintent/weak_label.hpp"

namespace qintent {

struct SplitPlan {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

struct Split {
  std::vector<LabeledQuery> train;
  std::vector<LabeledQuery> validation;
};

/// Seeded Fisher-Yates shuffle, then the first floor(fraction * n) entries train.
/// Throws InvariantError for fewer than 5 entries or a fraction outside (0, 1).
Split split(const std::vector<LabeledQuery>& corpus, const SplitPlan& plan);

struct TrainConfig {
  std::size_t epochs = 20;
  double lr = 0.01;
  double momentum = 0.9;
  /// Seeds the per-epoch example order.
  std::uint64_t shuffle_seed = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_accuracy = 0;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochRecord> history;
  bool diverged = false;
  std::string diagnostic;
  std::size_t skipped_train = 0;  // examples with no embedded token
};

/// Per-example SGD on soft-target cross-entropy. After every epoch the
/// validation set is scored; the best epoch by multi-modal accuracy (then lower
/// validation loss, then earlier) is returned. A non-finite loss stops training
/// and returns the last finite checkpoint with diverged = true.
TrainResult train(const ModelSpec& spec, const std::vector<LabeledQuery>& train_set,
                  const std::vector<LabeledQuery>& validation_set, const EmbeddingTable& emb,
                  const TrainConfig& config = {});

/// Per-target threshold: 0.5 for one gold intent, 0.25 for two, 0.16 for three.
double accuracy_threshold(std::size_t gold_intents);
/// 1 iff y_c > threshold for every c with t_c > 0.
int multi_modal_accuracy(const IntentDistribution& y, const IntentDistribution& t);

struct EvalReport {
  std::string gold_name;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t abstained = 0;
  double accuracy = 0;  // percent, abstentions scored 0
  double accuracy_answered = 0;  // percent over non-abstained queries
};

EvalReport evaluate(const IntentModel& model, const GoldSet& gold, const EmbeddingTable& emb);

struct RuleEvalReport {
  std::string gold_name;
  std::size_t total = 0;
  std::size_t labeled = 0;
  std::size_t correct = 0;
  double accuracy = 0;        // percent over labeled queries
  double percent_labeled = 0;
  bool accuracy_undefined = false;  // nothing labeled; accuracy reported as 0
};

RuleEvalReport evaluate_rules(const Labeler& labeler, const GoldSet& gold);

struct PredictionRow {
  std::vector<std::string> tokens;
  std::optional<IntentDistribution> predicted;
  IntentDistribution gold = IntentDistribution({1.0, 0.0, 0.0});
};

std::vector<PredictionRow> predict_report(const IntentModel& model, const GoldSet& gold,
                                          const EmbeddingTable& emb);
/// `query<TAB>pI<TAB>pT<TAB>pN<TAB>gI<TAB>gT<TAB>gN`, two decimals; abstentions print "n/a".
std::string format_prediction_row(const PredictionRow& row);

/// One row of the results table: dataset, labeling, model, embedding, GT-2, GT-3, epoch.
struct ResultRow {
  std::string dataset, labeling, model, embedding;
  double accuracy_gt2 = 0, accuracy_gt3 = 0;
  std::size_t epoch = 0;
  std::string fingerprint;
};
std::string format_result_header(char delimiter = '\t');
std::string format_result_row(const ResultRow& row, char delimiter = '\t');

}  // namespace qintent

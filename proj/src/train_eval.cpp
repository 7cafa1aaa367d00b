#include "qintent/train_eval.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "qintent/error.hpp"
#include "qintent/nn/layers.hpp"
#include "qintent/nn/loss.hpp"
#include "qintent/nn/optimizer.hpp"

namespace qintent {

namespace {

void shuffle(std::vector<std::size_t>& v, nn::Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

struct Example {
  nn::Tensor seq;
  std::array<double, kNumIntents> target;
};

std::vector<std::optional<Example>> embed_all(const std::vector<LabeledQuery>& set,
                                              const EmbeddingTable& emb) {
  std::vector<std::optional<Example>> out;
  out.reserve(set.size());
  for (const auto& q : set) {
    auto seq = embed_tokens(q.tokens, emb);
    if (!seq) out.emplace_back();
    else out.push_back(Example{std::move(*seq), q.target.weights()});
  }
  return out;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

Split split(const std::vector<LabeledQuery>& corpus, const SplitPlan& plan) {
  if (corpus.size() < 5)
    throw InvariantError("corpus of " + std::to_string(corpus.size()) + " entries is too small to split");
  if (!(plan.train_fraction > 0 && plan.train_fraction < 1))
    throw InvariantError("train fraction must be in (0, 1)");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  nn::Rng rng(plan.seed);
  shuffle(order, rng);
  const auto n_train = static_cast<std::size_t>(std::floor(plan.train_fraction * corpus.size()));
  Split s;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? s.train : s.validation).push_back(corpus[order[i]]);
  return s;
}

double accuracy_threshold(std::size_t gold_intents) {
  switch (gold_intents) {
    case 1: return 0.5;
    case 2: return 0.25;
    case 3: return 0.16;
  }
  throw InvariantError("gold distribution must have 1 to 3 intents");
}

int multi_modal_accuracy(const IntentDistribution& y, const IntentDistribution& t) {
  const double thr = accuracy_threshold(t.support_size());
  for (std::size_t c = 0; c < kNumIntents; ++c)
    if (t[c] > 0 && !(y[c] > thr)) return 0;
  return 1;
}

TrainResult train(const ModelSpec& spec, const std::vector<LabeledQuery>& train_set,
                  const std::vector<LabeledQuery>& validation_set, const EmbeddingTable& emb,
                  const TrainConfig& config) {
  if (train_set.empty() || validation_set.empty())
    throw InvariantError("training needs non-empty train and validation sets");
  if (emb.dim() != spec.input_dim)
    throw InvariantError("embedding dimension " + std::to_string(emb.dim()) + " != model input_dim " +
                         std::to_string(spec.input_dim));
  auto model = build(spec);
  nn::Sgd opt(config.lr, config.momentum);
  const auto train_ex = embed_all(train_set, emb);
  const auto val_ex = embed_all(validation_set, emb);

  TrainResult result;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < train_ex.size(); ++i) {
    if (train_ex[i]) order.push_back(i);
    else ++result.skipped_train;
  }
  if (order.empty()) throw InvariantError("no training example has an embedded token");

  auto params = model->parameters();
  bool have_best = false;
  EpochRecord best_rec;
  for (std::size_t epoch = 1; epoch <= config.epochs && !result.diverged; ++epoch) {
    nn::Rng rng(config.shuffle_seed ^ (0x9E3779B97F4A7C15ULL * epoch));
    shuffle(order, rng);
    double total = 0;
    for (std::size_t idx : order) {
      const auto& ex = *train_ex[idx];
      std::unique_ptr<ForwardCache> cache;
      const auto z = model->logits(ex.seq, &cache);
      const auto y = nn::softmax(z);
      const double loss = nn::cross_entropy(y, ex.target);
      if (!std::isfinite(loss)) {
        result.diverged = true;
        result.diagnostic = "non-finite loss at epoch " + std::to_string(epoch) + ", example " +
                            std::to_string(idx);
        break;
      }
      total += loss;
      model->zero_grad();
      model->backward(*cache, nn::softmax_cross_entropy_grad(y, ex.target));
      try {
        opt.step(params);
      } catch (const NumericError& e) {
        result.diverged = true;
        result.diagnostic = std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", example " +
                            std::to_string(idx);
        break;
      }
    }
    if (result.diverged) break;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total / order.size();
    std::size_t correct = 0, scored = 0;
    double vloss = 0;
    for (const auto& ex : val_ex) {
      if (!ex) continue;
      const auto y = model->predict(ex->seq);
      vloss += nn::cross_entropy(y, ex->target);
      ++scored;
      correct += multi_modal_accuracy(IntentDistribution({y[0], y[1], y[2]}), IntentDistribution(ex->target));
    }
    rec.val_loss = scored ? vloss / scored : 0.0;
    rec.val_accuracy = 100.0 * correct / val_ex.size();
    result.history.push_back(rec);

    const bool better = !have_best || rec.val_accuracy > best_rec.val_accuracy ||
                        (rec.val_accuracy == best_rec.val_accuracy && rec.val_loss < best_rec.val_loss);
    if (better) {
      have_best = true;
      best_rec = rec;
      result.best = Checkpoint::capture(*model, epoch,
                                        {{"train_loss", rec.train_loss},
                                         {"val_accuracy", rec.val_accuracy},
                                         {"val_loss", rec.val_loss}});
    }
  }
  if (!have_best) result.best = Checkpoint::capture(*model, 0);
  return result;
}

EvalReport evaluate(const IntentModel& model, const GoldSet& gold, const EmbeddingTable& emb) {
  EvalReport r;
  r.gold_name = gold.name;
  r.total = gold.entries.size();
  for (const auto& e : gold.entries) {
    const auto y = forward_query(model, e.tokens, emb);
    if (!y) {
      ++r.abstained;
      continue;
    }
    r.correct += multi_modal_accuracy(*y, e.target);
  }
  if (r.total) r.accuracy = 100.0 * r.correct / r.total;
  if (r.total > r.abstained) r.accuracy_answered = 100.0 * r.correct / (r.total - r.abstained);
  return r;
}

RuleEvalReport evaluate_rules(const Labeler& labeler, const GoldSet& gold) {
  RuleEvalReport r;
  r.gold_name = gold.name;
  r.total = gold.entries.size();
  for (const auto& e : gold.entries) {
    const auto label = labeler.label(e.tokens);
    if (!label) continue;
    ++r.labeled;
    r.correct += multi_modal_accuracy(to_distribution(*label), e.target);
  }
  if (r.total) r.percent_labeled = 100.0 * r.labeled / r.total;
  if (r.labeled) r.accuracy = 100.0 * r.correct / r.labeled;
  else r.accuracy_undefined = true;
  return r;
}

std::vector<PredictionRow> predict_report(const IntentModel& model, const GoldSet& gold,
                                          const EmbeddingTable& emb) {
  std::vector<PredictionRow> rows;
  for (const auto& e : gold.entries) rows.push_back({e.tokens, forward_query(model, e.tokens, emb), e.target});
  return rows;
}

std::string format_prediction_row(const PredictionRow& row) {
  std::string s = join_tokens(row.tokens);
  for (std::size_t c = 0; c < kNumIntents; ++c) s += '\t' + (row.predicted ? fmt2((*row.predicted)[c]) : "n/a");
  for (std::size_t c = 0; c < kNumIntents; ++c) s += '\t' + fmt2(row.gold[c]);
  return s;
}

std::string format_result_header(char d) {
  std::string s = "dataset";
  for (const char* col : {"labeling", "model", "embedding", "gt2", "gt3", "epoch", "fingerprint"})
    s += d + std::string(col);
  return s;
}

std::string format_result_row(const ResultRow& r, char d) {
  std::ostringstream os;
  os << r.dataset << d << r.labeling << d << r.model << d << r.embedding << d << fmt2(r.accuracy_gt2)
     << '%' << d << fmt2(r.accuracy_gt3) << '%' << d << r.epoch << d << r.fingerprint;
  return os.str();
}

}  // namespace qintent

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qintent/embedding.hpp"
#include "qintent/intent.hpp"
#include "qintent/nn/layers.hpp"
#include "qintent/nn/tensor.hpp"

namespace qintent {

enum class Arch { Rnn1, Rnn2, Rnn3, Cnn1 };

std::string arch_name(Arch a);  // "rnn1" ...
Arch parse_arch(std::string_view text);

/// Architecture hyperparameters. `reference` fills the published sizes; tests
/// shrink them for gradient checks.
struct ModelSpec {
  Arch arch = Arch::Rnn1;
  std::size_t input_dim = 0;
  /// Recurrent state size (RNN-1: 101, RNN-2/3: 100).
  std::size_t hidden = 101;
  /// Width of the hidden fully-connected layers (RNN-2/3: 100, CNN-1: 50).
  std::size_t fc_hidden = 100;
  /// CNN-1: feature maps per kernel height, channels after the 1-D conv,
  /// padded sequence length (kernel heights run 1..seq_len) and kernel width.
  std::size_t cnn_maps = 100;
  std::size_t cnn_reduced = 10;
  std::size_t cnn_seq_len = 4;
  std::size_t cnn_kernel_width = 3;
  std::uint64_t seed = 0;

  static ModelSpec reference(Arch arch, std::size_t input_dim, std::uint64_t seed = 0);
  /// Throws InvariantError for impossible shapes (e.g. CNN-1 with E < kernel width).
  void validate() const;
  std::string canonical() const;
  bool operator==(const ModelSpec&) const = default;
};

struct ParamShape {
  std::string name;
  std::vector<std::size_t> shape;
};

/// Parameter names and shapes in model order, without allocating them.
std::vector<ParamShape> parameter_layout(const ModelSpec& spec);
std::size_t count_params(const ModelSpec& spec);

/// Opaque per-example record of a forward pass, consumed by backward.
struct ForwardCache {
  virtual ~ForwardCache() = default;
};

/// A network over a (tokens x input_dim) sequence producing three logits.
class IntentModel {
 public:
  virtual ~IntentModel() = default;

  const ModelSpec& spec() const { return spec_; }

  /// Logits for `sequence` (T x input_dim, T >= 1). When `cache` is non-null
  /// it receives what backward needs.
  virtual std::vector<double> logits(const nn::Tensor& sequence,
                                     std::unique_ptr<ForwardCache>* cache = nullptr) const = 0;
  /// Accumulates parameter gradients for dL/dlogits.
  virtual void backward(const ForwardCache& cache, std::span<const double> dlogits) = 0;
  virtual std::vector<nn::Parameter*> parameters() = 0;

  std::vector<const nn::Parameter*> parameters() const;
  std::size_t num_parameters() const;
  void zero_grad();
  std::vector<double> predict(const nn::Tensor& sequence) const;

 protected:
  explicit IntentModel(ModelSpec spec) : spec_(std::move(spec)) {}
  ModelSpec spec_;
};

/// Allocates and seeds the network for `spec`.
std::unique_ptr<IntentModel> build(const ModelSpec& spec);

/// Embedded tokens in order, skipping tokens without a vector. nullopt when
/// every token is out of vocabulary.
std::optional<nn::Tensor> embed_tokens(const std::vector<std::string>& tokens,
                                       const EmbeddingTable& emb);

/// Softmax output for the query; nullopt (abstain) when no token is embedded.
std::optional<IntentDistribution> forward_query(const IntentModel& model,
                                                const std::vector<std::string>& tokens,
                                                const EmbeddingTable& emb);

}  // namespace qintent

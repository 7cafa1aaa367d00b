#pragma once

#include <span>
#include <vector>

#include "qintent/nn/tensor.hpp"

namespace qintent::nn {

/// SGD with heavy-ball momentum: v <- mu v + g; theta <- theta - lr v.
class Sgd {
 public:
  Sgd(double lr, double momentum);

  double lr() const { return lr_; }
  double momentum() const { return momentum_; }

  /// Throws NumericError naming the parameter if any gradient is non-finite;
  /// parameters are left untouched in that case.
  void step(std::span<Parameter* const> params);
  const std::vector<Tensor>& velocity() const { return velocity_; }

 private:
  double lr_;
  double momentum_;
  std::vector<Tensor> velocity_;
};

}  // namespace qintent::nn

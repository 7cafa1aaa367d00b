#include "qintent/nn/optimizer.hpp"

#include "qintent/error.hpp"

namespace qintent::nn {

Sgd::Sgd(double lr, double momentum) : lr_(lr), momentum_(momentum) {
  if (!(lr > 0)) throw InvariantError("learning rate must be positive");
  if (momentum < 0 || momentum >= 1) throw InvariantError("momentum must be in [0, 1)");
}

void Sgd::step(std::span<Parameter* const> params) {
  for (const Parameter* p : params)
    if (!p->grad.all_finite()) throw NumericError("non-finite gradient in '" + p->name + "'");
  if (velocity_.empty()) {
    for (const Parameter* p : params) velocity_.emplace_back(p->value.shape());
  }
  if (velocity_.size() != params.size()) throw InvariantError("optimizer parameter list changed");
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto v = velocity_[k].data();
    auto g = params[k]->grad.data();
    auto w = params[k]->value.data();
    if (v.size() != w.size()) throw ShapeError("velocity shape mismatch for '" + params[k]->name + "'");
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum_ * v[i] + g[i];
      w[i] -= lr_ * v[i];
    }
  }
}

}  // namespace qintent::nn

#include "qintent/nn/loss.hpp"

#include <cmath>

#include "qintent/error.hpp"

namespace qintent::nn {

double cross_entropy(std::span<const double> y, std::span<const double> t, bool* clamped) {
  if (y.size() != t.size()) throw ShapeError("cross_entropy length mismatch");
  double s = 0;
  bool hit = false;
  for (std::size_t c = 0; c < y.size(); ++c) {
    if (t[c] <= 0) continue;
    double p = y[c];
    if (p < kLogClamp) {
      p = kLogClamp;
      hit = true;
    }
    s -= t[c] * std::log(p);
  }
  if (clamped) *clamped = hit;
  return s;
}

double entropy(std::span<const double> t) {
  double s = 0;
  for (double x : t)
    if (x > 0) s -= x * std::log(x);
  return s;
}

std::vector<double> softmax_cross_entropy_grad(std::span<const double> y,
                                               std::span<const double> t) {
  if (y.size() != t.size()) throw ShapeError("softmax_cross_entropy_grad length mismatch");
  double total = 0;
  for (double x : t) total += x;
  std::vector<double> g(y.size());
  for (std::size_t c = 0; c < y.size(); ++c) g[c] = y[c] * total - t[c];
  return g;
}

}  // namespace qintent::nn

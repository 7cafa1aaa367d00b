#pragma once

#include <span>
#include <vector>

namespace qintent::nn {

inline constexpr double kLogClamp = 1e-12;

/// -sum_c t_c ln y_c. Probabilities below 1e-12 are clamped where t_c > 0 and
/// `clamped` is set.
double cross_entropy(std::span<const double> y, std::span<const double> t,
                     bool* clamped = nullptr);

/// Shannon entropy -sum t ln t (natural log, 0 ln 0 = 0).
double entropy(std::span<const double> t);

/// Gradient of cross_entropy(softmax(z), t) with respect to z: y * sum(t) - t.
std::vector<double> softmax_cross_entropy_grad(std::span<const double> y,
                                               std::span<const double> t);

}  // namespace qintent::nn

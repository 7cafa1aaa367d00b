#include "qintent/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "qintent/error.hpp"

namespace qintent::nn {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_))
    throw ShapeError("tensor data of length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str());
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape_[i]);
  }
  return s + ']';
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw InvariantError("Rng::below(0)");
  const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
  while (true) {
    const std::uint64_t r = engine_();
    if (r >= limit) return r % bound;
  }
}

void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (auto& x : t.data()) x = rng.uniform(-a, a);
}

void matvec(const Tensor& w, std::span<const double> x, std::span<double> y) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  if (x.size() != cols || y.size() != rows)
    throw ShapeError("matvec " + w.shape_str() + " * " + std::to_string(x.size()));
  const double* p = w.data().data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    double s = 0;
    for (std::size_t c = 0; c < cols; ++c) s += p[c] * x[c];
    y[r] = s;
  }
}

void matvec_t_acc(const Tensor& w, std::span<const double> dy, std::span<double> y) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  if (dy.size() != rows || y.size() != cols)
    throw ShapeError("matvec_t " + w.shape_str() + " * " + std::to_string(dy.size()));
  const double* p = w.data().data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    const double d = dy[r];
    if (d == 0) continue;
    for (std::size_t c = 0; c < cols; ++c) y[c] += p[c] * d;
  }
}

void outer_acc(Tensor& g, std::span<const double> dy, std::span<const double> x) {
  const std::size_t rows = g.dim(0), cols = g.dim(1);
  if (dy.size() != rows || x.size() != cols)
    throw ShapeError("outer " + g.shape_str() + " from " + std::to_string(dy.size()) + "x" +
                     std::to_string(x.size()));
  double* p = g.data().data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    const double d = dy[r];
    if (d == 0) continue;
    for (std::size_t c = 0; c < cols; ++c) p[c] += d * x[c];
  }
}

}  // namespace qintent::nn

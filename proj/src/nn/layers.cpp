#include "qintent/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qintent/error.hpp"

namespace qintent::nn {

std::vector<double> relu(std::span<const double> x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0 ? x[i] : 0.0;
  return y;
}

std::vector<double> relu_backward(std::span<const double> input, std::span<const double> dy) {
  if (input.size() != dy.size()) throw ShapeError("relu_backward length mismatch");
  std::vector<double> dx(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = input[i] > 0 ? dy[i] : 0.0;
  return dx;
}

Tensor relu(const Tensor& x) {
  auto v = relu(x.data());
  return Tensor(x.shape(), std::move(v));
}

Tensor relu_backward(const Tensor& input, const Tensor& dy) {
  auto v = relu_backward(input.data(), dy.data());
  return Tensor(input.shape(), std::move(v));
}

std::vector<double> softmax(std::span<const double> x) {
  if (x.empty()) return {};
  const double m = *std::max_element(x.begin(), x.end());
  std::vector<double> y(x.size());
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += y[i] = std::exp(x[i] - m);
  for (auto& v : y) v /= s;
  return y;
}

// ---- Linear

Linear::Linear(const std::string& name, std::size_t in, std::size_t out)
    : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}) {}

std::vector<double> Linear::forward(std::span<const double> x) const {
  std::vector<double> y(out());
  matvec(weight.value, x, y);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bias.value[i];
  return y;
}

std::vector<double> Linear::backward(std::span<const double> x, std::span<const double> dy) {
  outer_acc(weight.grad, dy, x);
  for (std::size_t i = 0; i < dy.size(); ++i) bias.grad[i] += dy[i];
  std::vector<double> dx(in(), 0.0);
  matvec_t_acc(weight.value, dy, dx);
  return dx;
}

void Linear::init(Rng& rng) {
  init_uniform(weight.value, in(), rng);
  init_uniform(bias.value, in(), rng);
}

// ---- RnnCell

RnnCell::RnnCell(const std::string& name, std::size_t in, std::size_t hidden, Activation act)
    : w_ih(name + ".w_ih", {hidden, in}),
      b_ih(name + ".b_ih", {hidden}),
      w_hh(name + ".w_hh", {hidden, hidden}),
      b_hh(name + ".b_hh", {hidden}),
      activation(act) {}

std::vector<double> RnnCell::forward(std::span<const double> x, std::span<const double> h_prev,
                                     std::vector<double>* preact) const {
  const std::size_t h = hidden();
  std::vector<double> a(h), r(h);
  matvec(w_ih.value, x, a);
  matvec(w_hh.value, h_prev, r);
  for (std::size_t i = 0; i < h; ++i) a[i] += r[i] + b_ih.value[i] + b_hh.value[i];
  if (preact) *preact = a;
  return activation == Activation::Relu ? relu(a) : a;
}

void RnnCell::backward(std::span<const double> x, std::span<const double> h_prev,
                       std::span<const double> preact, std::span<const double> dh,
                       std::vector<double>* dx, std::vector<double>* dh_prev) {
  std::vector<double> da = activation == Activation::Relu
                               ? relu_backward(preact, dh)
                               : std::vector<double>(dh.begin(), dh.end());
  outer_acc(w_ih.grad, da, x);
  outer_acc(w_hh.grad, da, h_prev);
  for (std::size_t i = 0; i < da.size(); ++i) {
    b_ih.grad[i] += da[i];
    b_hh.grad[i] += da[i];
  }
  if (dx) {
    dx->assign(in(), 0.0);
    matvec_t_acc(w_ih.value, da, *dx);
  }
  if (dh_prev) {
    dh_prev->assign(hidden(), 0.0);
    matvec_t_acc(w_hh.value, da, *dh_prev);
  }
}

void RnnCell::init(Rng& rng) {
  const std::size_t h = hidden();
  for (Parameter* p : parameters()) init_uniform(p->value, h, rng);
}

// ---- LstmCell

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

LstmCell::LstmCell(const std::string& name, std::size_t in, std::size_t hidden)
    : w_ih(name + ".w_ih", {4 * hidden, in}),
      b_ih(name + ".b_ih", {4 * hidden}),
      w_hh(name + ".w_hh", {4 * hidden, hidden}),
      b_hh(name + ".b_hh", {4 * hidden}) {}

std::pair<std::vector<double>, std::vector<double>> LstmCell::forward(
    std::span<const double> x, std::span<const double> h, std::span<const double> c,
    Step* step) const {
  const std::size_t n = hidden();
  std::vector<double> z(4 * n), r(4 * n);
  matvec(w_ih.value, x, z);
  matvec(w_hh.value, h, r);
  for (std::size_t k = 0; k < 4 * n; ++k) z[k] += r[k] + b_ih.value[k] + b_hh.value[k];
  Step s;
  s.i.resize(n);
  s.f.resize(n);
  s.g.resize(n);
  s.o.resize(n);
  s.c.resize(n);
  s.tanh_c.resize(n);
  std::vector<double> h_out(n);
  for (std::size_t k = 0; k < n; ++k) {
    s.i[k] = sigmoid(z[k]);
    s.f[k] = sigmoid(z[n + k]);
    s.g[k] = std::tanh(z[2 * n + k]);
    s.o[k] = sigmoid(z[3 * n + k]);
    s.c[k] = s.f[k] * c[k] + s.i[k] * s.g[k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    h_out[k] = s.o[k] * s.tanh_c[k];
  }
  std::vector<double> c_out = s.c;
  if (step) {
    s.x.assign(x.begin(), x.end());
    s.h_prev.assign(h.begin(), h.end());
    s.c_prev.assign(c.begin(), c.end());
    *step = std::move(s);
  }
  return {std::move(h_out), std::move(c_out)};
}

void LstmCell::backward(const Step& s, std::span<const double> dh, std::span<const double> dc,
                        std::vector<double>* dx, std::vector<double>* dh_prev,
                        std::vector<double>* dc_prev) {
  const std::size_t n = hidden();
  std::vector<double> dz(4 * n);
  std::vector<double> dcp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double dct = dc[k] + dh[k] * s.o[k] * (1 - s.tanh_c[k] * s.tanh_c[k]);
    dz[k] = dct * s.g[k] * s.i[k] * (1 - s.i[k]);
    dz[n + k] = dct * s.c_prev[k] * s.f[k] * (1 - s.f[k]);
    dz[2 * n + k] = dct * s.i[k] * (1 - s.g[k] * s.g[k]);
    dz[3 * n + k] = dh[k] * s.tanh_c[k] * s.o[k] * (1 - s.o[k]);
    dcp[k] = dct * s.f[k];
  }
  outer_acc(w_ih.grad, dz, s.x);
  outer_acc(w_hh.grad, dz, s.h_prev);
  for (std::size_t k = 0; k < 4 * n; ++k) {
    b_ih.grad[k] += dz[k];
    b_hh.grad[k] += dz[k];
  }
  if (dx) {
    dx->assign(in(), 0.0);
    matvec_t_acc(w_ih.value, dz, *dx);
  }
  if (dh_prev) {
    dh_prev->assign(n, 0.0);
    matvec_t_acc(w_hh.value, dz, *dh_prev);
  }
  if (dc_prev) *dc_prev = std::move(dcp);
}

void LstmCell::init(Rng& rng) {
  const std::size_t h = hidden();
  for (Parameter* p : parameters()) init_uniform(p->value, h, rng);
}

// ---- Conv2d

Conv2d::Conv2d(const std::string& name, std::size_t in_ch, std::size_t out_ch, std::size_t kh,
               std::size_t kw)
    : kernel(name + ".kernel", {out_ch, in_ch, kh, kw}), bias(name + ".bias", {out_ch}) {}

Tensor Conv2d::forward(const Tensor& input) const {
  const auto& ks = kernel.value.shape();
  const std::size_t oc = ks[0], ic = ks[1], kh = ks[2], kw = ks[3];
  if (input.rank() != 3 || input.dim(0) != ic || input.dim(1) < kh || input.dim(2) < kw)
    throw ShapeError("conv2d input " + input.shape_str() + " for kernel " + kernel.value.shape_str());
  const std::size_t H = input.dim(1), W = input.dim(2);
  const std::size_t oh = H - kh + 1, ow = W - kw + 1;
  Tensor out({oc, oh, ow});
  for (std::size_t o = 0; o < oc; ++o)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double s = bias.value[o];
        for (std::size_t c = 0; c < ic; ++c)
          for (std::size_t dy = 0; dy < kh; ++dy)
            for (std::size_t dx = 0; dx < kw; ++dx)
              s += kernel.value.at(o, c, dy, dx) * input.at(c, y + dy, x + dx);
        out.at(o, y, x) = s;
      }
  return out;
}

Tensor Conv2d::backward(const Tensor& input, const Tensor& dout) {
  const auto& ks = kernel.value.shape();
  const std::size_t oc = ks[0], ic = ks[1], kh = ks[2], kw = ks[3];
  const std::size_t oh = dout.dim(1), ow = dout.dim(2);
  if (dout.dim(0) != oc || oh != input.dim(1) - kh + 1 || ow != input.dim(2) - kw + 1)
    throw ShapeError("conv2d backward shape " + dout.shape_str());
  Tensor din(input.shape());
  for (std::size_t o = 0; o < oc; ++o)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        const double g = dout.at(o, y, x);
        if (g == 0) continue;
        bias.grad[o] += g;
        for (std::size_t c = 0; c < ic; ++c)
          for (std::size_t dy = 0; dy < kh; ++dy)
            for (std::size_t dx = 0; dx < kw; ++dx) {
              kernel.grad.at(o, c, dy, dx) += g * input.at(c, y + dy, x + dx);
              din.at(c, y + dy, x + dx) += g * kernel.value.at(o, c, dy, dx);
            }
      }
  return din;
}

void Conv2d::init(Rng& rng) {
  const auto& ks = kernel.value.shape();
  const std::size_t fan_in = ks[1] * ks[2] * ks[3];
  init_uniform(kernel.value, fan_in, rng);
  init_uniform(bias.value, fan_in, rng);
}

// ---- Conv1d

Conv1d::Conv1d(const std::string& name, std::size_t in_ch, std::size_t out_ch, std::size_t k)
    : kernel(name + ".kernel", {out_ch, in_ch, k}), bias(name + ".bias", {out_ch}) {}

Tensor Conv1d::forward(const Tensor& input) const {
  const auto& ks = kernel.value.shape();
  const std::size_t oc = ks[0], ic = ks[1], k = ks[2];
  if (input.rank() != 2 || input.dim(0) != ic || input.dim(1) < k)
    throw ShapeError("conv1d input " + input.shape_str() + " for kernel " + kernel.value.shape_str());
  const std::size_t ol = input.dim(1) - k + 1;
  Tensor out({oc, ol});
  for (std::size_t o = 0; o < oc; ++o)
    for (std::size_t x = 0; x < ol; ++x) {
      double s = bias.value[o];
      for (std::size_t c = 0; c < ic; ++c)
        for (std::size_t d = 0; d < k; ++d) s += kernel.value.at(o, c, d) * input.at(c, x + d);
      out.at(o, x) = s;
    }
  return out;
}

Tensor Conv1d::backward(const Tensor& input, const Tensor& dout) {
  const auto& ks = kernel.value.shape();
  const std::size_t oc = ks[0], ic = ks[1], k = ks[2];
  const std::size_t ol = dout.dim(1);
  if (dout.dim(0) != oc || ol != input.dim(1) - k + 1)
    throw ShapeError("conv1d backward shape " + dout.shape_str());
  Tensor din(input.shape());
  for (std::size_t o = 0; o < oc; ++o)
    for (std::size_t x = 0; x < ol; ++x) {
      const double g = dout.at(o, x);
      if (g == 0) continue;
      bias.grad[o] += g;
      for (std::size_t c = 0; c < ic; ++c)
        for (std::size_t d = 0; d < k; ++d) {
          kernel.grad.at(o, c, d) += g * input.at(c, x + d);
          din.at(c, x + d) += g * kernel.value.at(o, c, d);
        }
    }
  return din;
}

void Conv1d::init(Rng& rng) {
  const auto& ks = kernel.value.shape();
  const std::size_t fan_in = ks[1] * ks[2];
  init_uniform(kernel.value, fan_in, rng);
  init_uniform(bias.value, fan_in, rng);
}

// ---- max pooling over a whole axis

Tensor max_over_axis(const Tensor& input, std::size_t axis, std::vector<std::size_t>* argmax) {
  const auto& s = input.shape();
  if (axis >= s.size()) throw ShapeError("max axis " + std::to_string(axis) + " of " + input.shape_str());
  if (s[axis] == 0) throw ShapeError("max over an empty axis");
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= s[a];
  for (std::size_t a = axis + 1; a < s.size(); ++a) inner *= s[a];
  const std::size_t n = s[axis];
  std::vector<std::size_t> out_shape;
  for (std::size_t a = 0; a < s.size(); ++a)
    if (a != axis) out_shape.push_back(s[a]);
  if (out_shape.empty()) out_shape.push_back(1);
  Tensor out(out_shape);
  if (argmax) argmax->assign(outer * inner, 0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) {
      std::size_t best = o * n * inner + i;
      for (std::size_t j = 1; j < n; ++j) {
        const std::size_t idx = (o * n + j) * inner + i;
        if (input[idx] > input[best]) best = idx;
      }
      out[o * inner + i] = input[best];
      if (argmax) (*argmax)[o * inner + i] = best;
    }
  return out;
}

Tensor max_over_axis_backward(const std::vector<std::size_t>& input_shape,
                              const std::vector<std::size_t>& argmax, const Tensor& dout) {
  if (argmax.size() != dout.size()) throw ShapeError("max backward argmax/gradient size mismatch");
  Tensor din(input_shape);
  for (std::size_t k = 0; k < argmax.size(); ++k) din[argmax[k]] += dout[k];
  return din;
}

}  // namespace qintent::nn

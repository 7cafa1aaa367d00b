#pragma once

// Scalar-loop reference computations for the nn layers, plus a central
// finite-difference gradient checker. Nested std::vector storage on purpose,
// so indexing bugs in the flat Tensor code cannot be mirrored here.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qintent/nn/tensor.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Mat to_mat(const qintent::nn::Tensor& t) {
  Mat m(t.dim(0), Vec(t.dim(1)));
  for (std::size_t i = 0; i < t.dim(0); ++i)
    for (std::size_t j = 0; j < t.dim(1); ++j) m[i][j] = t.data()[i * t.dim(1) + j];
  return m;
}

inline Vec to_vec(const qintent::nn::Tensor& t) { return Vec(t.data().begin(), t.data().end()); }

inline Vec affine(const Mat& w, const Vec& x, const Vec& b) {
  Vec y(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < x.size(); ++j) s += w[i][j] * x[j];
    y[i] = s;
  }
  return y;
}

inline double sig(double x) { return 1 / (1 + std::exp(-x)); }

/// One LSTM step with gates in (i, f, g, o) row blocks.
inline void lstm_step(const Mat& wih, const Vec& bih, const Mat& whh, const Vec& bhh, const Vec& x, Vec& h,
                      Vec& c) {
  const std::size_t n = h.size();
  const Vec a = affine(wih, x, bih);
  const Vec r = affine(whh, h, bhh);
  Vec hn(n), cn(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double i = sig(a[k] + r[k]);
    const double f = sig(a[n + k] + r[n + k]);
    const double g = std::tanh(a[2 * n + k] + r[2 * n + k]);
    const double o = sig(a[3 * n + k] + r[3 * n + k]);
    cn[k] = f * c[k] + i * g;
    hn[k] = o * std::tanh(cn[k]);
  }
  h = hn;
  c = cn;
}

/// Valid 2-D cross-correlation of a single-channel H x W image with one kernel.
inline Mat conv2d_single(const Mat& img, const Mat& k, double bias) {
  const std::size_t oh = img.size() - k.size() + 1, ow = img[0].size() - k[0].size() + 1;
  Mat out(oh, Vec(ow));
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = bias;
      for (std::size_t dy = 0; dy < k.size(); ++dy)
        for (std::size_t dx = 0; dx < k[0].size(); ++dx) s += k[dy][dx] * img[y + dy][x + dx];
      out[y][x] = s;
    }
  return out;
}

inline double rel_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

struct GradCheck {
  double max_rel = 0;
  std::string worst;
  std::size_t checked = 0;
};

/// `loss` runs a forward pass only; `backprop` must zero and refill every
/// parameter's grad for the same loss. Every element of every parameter is
/// perturbed by +-h.
inline GradCheck check_gradients(const std::vector<qintent::nn::Parameter*>& params,
                                 const std::function<double()>& loss, const std::function<void()>& backprop,
                                 double h = 1e-5) {
  backprop();
  GradCheck r;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double lp = loss();
      p->value[i] = saved - h;
      const double lm = loss();
      p->value[i] = saved;
      const double numeric = (lp - lm) / (2 * h);
      const double e = rel_error(p->grad[i], numeric);
      ++r.checked;
      if (e > r.max_rel) {
        r.max_rel = e;
        r.worst = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

/// Same check for an input vector instead of parameters.
inline GradCheck check_input_gradient(std::vector<double>& input, const std::vector<double>& analytic,
                                      const std::function<double()>& loss, double h = 1e-5) {
  GradCheck r;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double saved = input[i];
    input[i] = saved + h;
    const double lp = loss();
    input[i] = saved - h;
    const double lm = loss();
    input[i] = saved;
    const double e = rel_error(analytic[i], (lp - lm) / (2 * h));
    ++r.checked;
    if (e > r.max_rel) {
      r.max_rel = e;
      r.worst = "input[" + std::to_string(i) + "]";
    }
  }
  return r;
}

}  // namespace oracle

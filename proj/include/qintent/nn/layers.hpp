#pragma once

#include <span>
#include <string>
#include <vector>

#include "qintent/nn/tensor.hpp"

namespace qintent::nn {

enum class Activation { Identity, Relu };

std::vector<double> relu(std::span<const double> x);
/// dy masked where the forward input was <= 0.
std::vector<double> relu_backward(std::span<const double> input, std::span<const double> dy);
/// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> x);

/// y = W x + b
struct Linear {
  Parameter weight;  // out x in
  Parameter bias;    // out

  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out);
  std::size_t in() const { return weight.value.dim(1); }
  std::size_t out() const { return weight.value.dim(0); }

  std::vector<double> forward(std::span<const double> x) const;
  /// Accumulates parameter gradients; returns dL/dx.
  std::vector<double> backward(std::span<const double> x, std::span<const double> dy);
  void init(Rng& rng);
  std::vector<Parameter*> parameters() { return {&weight, &bias}; }
};

/// h = f(W_ih x + b_ih + W_hh h_prev + b_hh)
struct RnnCell {
  Parameter w_ih, b_ih, w_hh, b_hh;
  Activation activation = Activation::Identity;

  RnnCell() = default;
  RnnCell(const std::string& name, std::size_t in, std::size_t hidden,
          Activation act = Activation::Identity);
  std::size_t in() const { return w_ih.value.dim(1); }
  std::size_t hidden() const { return w_hh.value.dim(0); }

  /// Returns h; stores the preactivation when requested.
  std::vector<double> forward(std::span<const double> x, std::span<const double> h_prev,
                              std::vector<double>* preact = nullptr) const;
  /// Given dL/dh, accumulates gradients and writes dL/dx and dL/dh_prev.
  void backward(std::span<const double> x, std::span<const double> h_prev,
                std::span<const double> preact, std::span<const double> dh,
                std::vector<double>* dx, std::vector<double>* dh_prev);
  void init(Rng& rng);
  std::vector<Parameter*> parameters() { return {&w_ih, &b_ih, &w_hh, &b_hh}; }
};

/// LSTM with gate blocks ordered (input, forget, cell, output) in the 4h rows.
struct LstmCell {
  Parameter w_ih, b_ih, w_hh, b_hh;

  struct Step {
    std::vector<double> x, h_prev, c_prev;
    std::vector<double> i, f, g, o;  // activated gates
    std::vector<double> c, tanh_c;
  };

  LstmCell() = default;
  LstmCell(const std::string& name, std::size_t in, std::size_t hidden);
  std::size_t in() const { return w_ih.value.dim(1); }
  std::size_t hidden() const { return w_hh.value.dim(1); }

  /// Returns (h', c').
  std::pair<std::vector<double>, std::vector<double>> forward(std::span<const double> x,
                                                              std::span<const double> h,
                                                              std::span<const double> c,
                                                              Step* step = nullptr) const;
  void backward(const Step& step, std::span<const double> dh, std::span<const double> dc,
                std::vector<double>* dx, std::vector<double>* dh_prev,
                std::vector<double>* dc_prev);
  void init(Rng& rng);
  std::vector<Parameter*> parameters() { return {&w_ih, &b_ih, &w_hh, &b_hh}; }
};

/// Valid cross-correlation, stride 1. Input in_ch x H x W, output out_ch x (H-kh+1) x (W-kw+1).
struct Conv2d {
  Parameter kernel;  // out_ch x in_ch x kh x kw
  Parameter bias;    // out_ch

  Conv2d() = default;
  Conv2d(const std::string& name, std::size_t in_ch, std::size_t out_ch, std::size_t kh,
         std::size_t kw);
  Tensor forward(const Tensor& input) const;
  /// Returns dL/dinput.
  Tensor backward(const Tensor& input, const Tensor& dout);
  void init(Rng& rng);
  std::vector<Parameter*> parameters() { return {&kernel, &bias}; }
};

/// Valid 1-D cross-correlation. Input in_ch x L, output out_ch x (L-k+1).
struct Conv1d {
  Parameter kernel;  // out_ch x in_ch x k
  Parameter bias;

  Conv1d() = default;
  Conv1d(const std::string& name, std::size_t in_ch, std::size_t out_ch, std::size_t k);
  Tensor forward(const Tensor& input) const;
  Tensor backward(const Tensor& input, const Tensor& dout);
  void init(Rng& rng);
  std::vector<Parameter*> parameters() { return {&kernel, &bias}; }
};

/// Max over one axis; `argmax` receives, for every output element, the flat
/// input index that produced it.
Tensor max_over_axis(const Tensor& input, std::size_t axis,
                     std::vector<std::size_t>* argmax = nullptr);
Tensor max_over_axis_backward(const std::vector<std::size_t>& input_shape,
                              const std::vector<std::size_t>& argmax, const Tensor& dout);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& input, const Tensor& dy);

}  // namespace qintent::nn

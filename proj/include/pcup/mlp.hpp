#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pcup {

enum class Activation { Softplus, Linear };

std::string_view to_string(Activation act);
Activation activation_from_string(std::string_view name);

/// Numerically stable log(1 + e^x).
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

/// d/dx softplus(x) = logistic(x).
inline double softplus_grad(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Dense row-major matrix. Batched activations use (features x batch)
/// layout so every reduction over the feature axis runs in a fixed order
/// regardless of batch size.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix &, const Matrix &) = default;
};

struct Layer {
  Matrix weight; // out x in
  std::vector<double> bias;
  Activation activation = Activation::Linear;

  std::size_t in_width() const { return weight.cols; }
  std::size_t out_width() const { return weight.rows; }

  friend bool operator==(const Layer &, const Layer &) = default;
};

struct MlpParams {
  std::vector<Layer> layers;

  std::size_t input_width() const { return layers.empty() ? 0 : layers.front().in_width(); }
  std::size_t output_width() const { return layers.empty() ? 0 : layers.back().out_width(); }
  std::size_t parameter_count() const;
  /// Throws BadArgument on inconsistent shapes or non-finite values. With
  /// `chained`, each layer's input width must equal the previous output.
  void validate(bool chained = true) const;
  /// Same shapes and activations, all values zero.
  MlpParams zeros_like() const;

  template <class F> void for_each_buffer(F &&f) {
    for (auto &l : layers) {
      f(std::span<double>(l.weight.data));
      f(std::span<double>(l.bias));
    }
  }
  template <class F> void for_each_buffer(F &&f) const {
    for (const auto &l : layers) {
      f(std::span<const double>(l.weight.data));
      f(std::span<const double>(l.bias));
    }
  }

  friend bool operator==(const MlpParams &, const MlpParams &) = default;
};

/// Layer with Glorot-uniform weights, zero bias.
template <class Rng>
Layer glorot_layer(std::size_t in, std::size_t out, Activation act, Rng &rng);

// Batched kernels on (features x batch) matrices.

/// out = W * in + b (broadcast over columns).
void affine_forward(const Layer &layer, const Matrix &in, Matrix &out);
/// Softplus with sharpness beta is softplus(beta * x) / beta.
/// In place activation; `pre` is kept by the caller for the backward pass.
void apply_activation(Activation act, const Matrix &pre, Matrix &out, double beta = 1.0);
/// d_pre = d_out * act'(pre), in place on d_out.
void activation_backward(Activation act, const Matrix &pre, Matrix &d_out, double beta = 1.0);
/// Accumulates dW += d_pre * in^T and db += rowsum(d_pre).
void affine_param_backward(const Matrix &d_pre, const Matrix &in, Layer &grad);
/// d_in = W^T * d_pre.
void affine_input_backward(const Layer &layer, const Matrix &d_pre, Matrix &d_in);

/// Dot product with a fixed four-lane accumulation order.
double ordered_dot(std::span<const double> a, std::span<const double> b);

} // namespace pcup

#include <random>

namespace pcup {

template <class Rng>
Layer glorot_layer(std::size_t in, std::size_t out, Activation act, Rng &rng) {
  Layer l;
  l.weight = Matrix(out, in);
  l.bias.assign(out, 0.0);
  l.activation = act;
  const double a = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-a, a);
  for (double &w : l.weight.data)
    w = dist(rng);
  return l;
}

} // namespace pcup

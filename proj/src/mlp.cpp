#include "pcup/mlp.hpp"

#include <string>

#include "pcup/error.hpp"

namespace pcup {

std::string_view to_string(Activation act) {
  return act == Activation::Softplus ? "softplus" : "linear";
}

Activation activation_from_string(std::string_view name) {
  if (name == "softplus")
    return Activation::Softplus;
  if (name == "linear")
    return Activation::Linear;
  throw Error(ErrorCode::Corrupt, "unknown activation '" + std::string(name) + "'");
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto &l : layers)
    n += l.weight.data.size() + l.bias.size();
  return n;
}

void MlpParams::validate(bool chained) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer &l = layers[i];
    if (l.weight.data.size() != l.weight.rows * l.weight.cols || l.bias.size() != l.weight.rows)
      throw Error(ErrorCode::BadArgument, "layer " + std::to_string(i) + " has inconsistent shapes");
    if (chained && i > 0 && layers[i - 1].out_width() != l.in_width())
      throw Error(ErrorCode::BadArgument, "layer " + std::to_string(i) + " input width mismatch");
    for (double v : l.weight.data)
      if (!std::isfinite(v))
        throw Error(ErrorCode::BadArgument, "non-finite weight in layer " + std::to_string(i));
    for (double v : l.bias)
      if (!std::isfinite(v))
        throw Error(ErrorCode::BadArgument, "non-finite bias in layer " + std::to_string(i));
  }
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z;
  z.layers.reserve(layers.size());
  for (const auto &l : layers)
    z.layers.push_back(Layer{Matrix(l.weight.rows, l.weight.cols), std::vector<double>(l.bias.size(), 0.0),
                             l.activation});
  return z;
}

void affine_forward(const Layer &layer, const Matrix &in, Matrix &out) {
  const std::size_t n = in.cols;
  out.rows = layer.out_width();
  out.cols = n;
  out.data.resize(out.rows * n);
  for (std::size_t i = 0; i < out.rows; ++i) {
    double *o = out.data.data() + i * n;
    const double b = layer.bias[i];
    for (std::size_t j = 0; j < n; ++j)
      o[j] = b;
    for (std::size_t k = 0; k < layer.in_width(); ++k) {
      const double w = layer.weight(i, k);
      const double *x = in.data.data() + k * n;
      for (std::size_t j = 0; j < n; ++j)
        o[j] += w * x[j];
    }
  }
}

void apply_activation(Activation act, const Matrix &pre, Matrix &out, double beta) {
  out.rows = pre.rows;
  out.cols = pre.cols;
  out.data.resize(pre.data.size());
  if (act == Activation::Linear) {
    out.data = pre.data;
    return;
  }
  if (beta == 1.0) {
    for (std::size_t i = 0; i < pre.data.size(); ++i)
      out.data[i] = softplus(pre.data[i]);
    return;
  }
  for (std::size_t i = 0; i < pre.data.size(); ++i)
    out.data[i] = softplus(beta * pre.data[i]) / beta;
}

void activation_backward(Activation act, const Matrix &pre, Matrix &d_out, double beta) {
  if (act == Activation::Linear)
    return;
  for (std::size_t i = 0; i < pre.data.size(); ++i)
    d_out.data[i] *= softplus_grad(beta * pre.data[i]);
}

double ordered_dot(std::span<const double> a, std::span<const double> b) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n = a.size();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
  }
  for (; j < n; ++j)
    s0 += a[j] * b[j];
  return (s0 + s1) + (s2 + s3);
}

void affine_param_backward(const Matrix &d_pre, const Matrix &in, Layer &grad) {
  for (std::size_t i = 0; i < d_pre.rows; ++i) {
    const auto dz = d_pre.row(i);
    double sum = 0.0;
    for (double v : dz)
      sum += v;
    grad.bias[i] += sum;
    for (std::size_t k = 0; k < in.rows; ++k)
      grad.weight(i, k) += ordered_dot(dz, in.row(k));
  }
}

void affine_input_backward(const Layer &layer, const Matrix &d_pre, Matrix &d_in) {
  const std::size_t n = d_pre.cols;
  d_in.rows = layer.in_width();
  d_in.cols = n;
  d_in.data.assign(d_in.rows * n, 0.0);
  for (std::size_t i = 0; i < layer.out_width(); ++i) {
    const double *dz = d_pre.data.data() + i * n;
    for (std::size_t k = 0; k < layer.in_width(); ++k) {
      const double w = layer.weight(i, k);
      double *dx = d_in.data.data() + k * n;
      for (std::size_t j = 0; j < n; ++j)
        dx[j] += w * dz[j];
    }
  }
}

} // namespace pcup

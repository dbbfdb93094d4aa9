#include "pcup/plse.hpp"

#include <cmath>

#include <random>
#include <string>

#include "pcup/error.hpp"

namespace pcup {

void PlseModel::validate() const {
  encoder.validate(false);
  estimator.validate();
  if (!(sharpness > 0.0) || !std::isfinite(sharpness))
    throw Error(ErrorCode::BadArgument, "sharpness must be positive and finite");
  if (encoder.layers.size() < 2)
    throw Error(ErrorCode::BadArgument, "encoder needs point layers and a head");
  for (std::size_t i = 1; i + 1 < encoder.layers.size(); ++i)
    if (encoder.layers[i].in_width() != encoder.layers[i - 1].out_width())
      throw Error(ErrorCode::BadArgument, "encoder point layers do not chain");
  if (encoder.input_width() != 3 || encoder.output_width() != feature_dim)
    throw Error(ErrorCode::BadArgument, "encoder must map 3 -> feature_dim");
  const Layer &head = encoder.layers.back();
  if (head.in_width() != 2 * encoder.layers[encoder.layers.size() - 2].out_width() ||
      head.activation != Activation::Linear)
    throw Error(ErrorCode::BadArgument, "encoder head must be linear over [point, global] features");
  if (estimator.input_width() != estimator_input_width() || estimator.output_width() != 1)
    throw Error(ErrorCode::BadArgument, "estimator width must be 3 + d * (S + 1) -> 1");
  for (const auto &l : estimator.layers)
    if (l.activation != Activation::Softplus)
      throw Error(ErrorCode::BadArgument, "estimator layers must be softplus");
}

PlseGradients PlseGradients::zeros_like(const PlseModel &model) {
  return {model.encoder.zeros_like(), model.estimator.zeros_like()};
}

void PlseGradients::add_scaled(const PlseGradients &other, double scale) {
  auto add = [scale](MlpParams &dst, const MlpParams &src) {
    for (std::size_t i = 0; i < dst.layers.size(); ++i) {
      auto &d = dst.layers[i];
      const auto &s = src.layers[i];
      for (std::size_t j = 0; j < d.weight.data.size(); ++j)
        d.weight.data[j] += scale * s.weight.data[j];
      for (std::size_t j = 0; j < d.bias.size(); ++j)
        d.bias[j] += scale * s.bias[j];
    }
  };
  add(encoder, other.encoder);
  add(estimator, other.estimator);
}

namespace {

void append_buffers(const MlpParams &p, std::vector<double> &out) {
  p.for_each_buffer([&](std::span<const double> b) { out.insert(out.end(), b.begin(), b.end()); });
}

} // namespace

std::vector<double> PlseGradients::flatten() const {
  std::vector<double> out;
  append_buffers(encoder, out);
  append_buffers(estimator, out);
  return out;
}

std::vector<double> flatten_parameters(const PlseModel &model) {
  std::vector<double> out;
  out.reserve(model.encoder.parameter_count() + model.estimator.parameter_count());
  append_buffers(model.encoder, out);
  append_buffers(model.estimator, out);
  return out;
}

void assign_parameters(PlseModel &model, std::span<const double> flat) {
  std::size_t pos = 0;
  auto take = [&](std::span<double> b) {
    if (pos + b.size() > flat.size())
      throw Error(ErrorCode::BadArgument, "parameter vector too short");
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + b.size()), b.begin());
    pos += b.size();
  };
  model.encoder.for_each_buffer(take);
  model.estimator.for_each_buffer(take);
  if (pos != flat.size())
    throw Error(ErrorCode::BadArgument, "parameter vector too long");
}

PlseModel init_model(std::size_t feature_dim, std::size_t sampling_steps, std::size_t hidden,
                     std::uint64_t rng_seed) {
  if (feature_dim < 1 || hidden < 1)
    throw Error(ErrorCode::BadArgument, "feature_dim and hidden must be positive");
  std::mt19937_64 rng(rng_seed);
  PlseModel m;
  m.feature_dim = feature_dim;
  m.hidden = hidden;
  m.sampling_steps = sampling_steps;
  m.encoder.layers.push_back(glorot_layer(3, hidden, Activation::Softplus, rng));
  m.encoder.layers.push_back(glorot_layer(hidden, hidden, Activation::Softplus, rng));
  m.encoder.layers.push_back(glorot_layer(2 * hidden, feature_dim, Activation::Linear, rng));
  std::size_t width = m.estimator_input_width();
  for (std::size_t h : kEstimatorHidden) {
    m.estimator.layers.push_back(glorot_layer(width, h, Activation::Softplus, rng));
    width = h;
  }
  m.estimator.layers.push_back(glorot_layer(width, 1, Activation::Softplus, rng));
  return m;
}

// ---------------------------------------------------------------- encoder

EncoderTape encoder_forward(const PlseModel &model, const PointCloud &cloud) {
  if (cloud.empty())
    throw Error(ErrorCode::EmptyCloud, "cannot encode an empty cloud");
  const std::size_t n = cloud.size();
  const std::size_t point_layers = model.encoder.layers.size() - 1;

  EncoderTape tape;
  tape.input = Matrix(3, n);
  for (std::size_t j = 0; j < n; ++j) {
    tape.input(0, j) = cloud[j].x;
    tape.input(1, j) = cloud[j].y;
    tape.input(2, j) = cloud[j].z;
  }
  tape.pre.resize(point_layers);
  tape.act.resize(point_layers);
  const Matrix *in = &tape.input;
  for (std::size_t l = 0; l < point_layers; ++l) {
    const Layer &layer = model.encoder.layers[l];
    affine_forward(layer, *in, tape.pre[l]);
    apply_activation(layer.activation, tape.pre[l], tape.act[l], model.sharpness);
    in = &tape.act[l];
  }

  // The head is linear, so averaging W [h_j; g] + b over points equals
  // applying it once to [mean_j h_j; g].
  const Matrix &h = tape.act.back();
  const std::size_t width = h.rows;
  tape.head_input.assign(2 * width, 0.0);
  tape.argmax.assign(width, 0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < width; ++i) {
    const auto row = h.row(i);
    double sum = 0.0;
    std::size_t best = 0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += row[j];
      if (row[j] > row[best])
        best = j;
    }
    tape.head_input[i] = sum * inv_n;
    tape.head_input[width + i] = row[best];
    tape.argmax[i] = best;
  }

  const Layer &head = model.encoder.layers.back();
  tape.feature.resize(head.out_width());
  for (std::size_t i = 0; i < head.out_width(); ++i) {
    double v = head.bias[i];
    for (std::size_t k = 0; k < head.in_width(); ++k)
      v += head.weight(i, k) * tape.head_input[k];
    tape.feature[i] = v;
  }
  return tape;
}

void encoder_backward(const PlseModel &model, const EncoderTape &tape, std::span<const double> d_feature,
                      MlpParams &grads) {
  const std::size_t point_layers = model.encoder.layers.size() - 1;
  const Layer &head = model.encoder.layers.back();
  Layer &g_head = grads.layers.back();

  std::vector<double> d_head_in(head.in_width(), 0.0);
  for (std::size_t i = 0; i < head.out_width(); ++i) {
    const double df = d_feature[i];
    g_head.bias[i] += df;
    for (std::size_t k = 0; k < head.in_width(); ++k) {
      g_head.weight(i, k) += df * tape.head_input[k];
      d_head_in[k] += head.weight(i, k) * df;
    }
  }

  const Matrix &h = tape.act.back();
  const std::size_t n = h.cols;
  const std::size_t width = h.rows;
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix d_act(width, n);
  for (std::size_t i = 0; i < width; ++i) {
    const double share = d_head_in[i] * inv_n;
    auto row = d_act.row(i);
    for (std::size_t j = 0; j < n; ++j)
      row[j] = share;
    row[tape.argmax[i]] += d_head_in[width + i];
  }

  Matrix d_in;
  for (std::size_t l = point_layers; l-- > 0;) {
    const Layer &layer = model.encoder.layers[l];
    activation_backward(layer.activation, tape.pre[l], d_act, model.sharpness);
    const Matrix &in = l == 0 ? tape.input : tape.act[l - 1];
    affine_param_backward(d_act, in, grads.layers[l]);
    if (l > 0) {
      affine_input_backward(layer, d_act, d_in);
      std::swap(d_act, d_in);
    }
  }
}

std::vector<double> encode(const PlseModel &model, const PointCloud &cloud) {
  return encoder_forward(model, cloud).feature;
}

std::vector<double> encode_ladder(const PlseModel &model, const SamplingLadder &ladder) {
  if (ladder.levels() != model.levels())
    throw Error(ErrorCode::LadderMismatch, "ladder has " + std::to_string(ladder.levels()) +
                                               " levels, model expects " + std::to_string(model.levels()));
  std::vector<double> features;
  features.reserve(model.feature_dim * model.levels());
  for (const auto &level : ladder.clouds) {
    const auto f = encode(model, level);
    features.insert(features.end(), f.begin(), f.end());
  }
  return features;
}

// -------------------------------------------------------------- estimator

std::vector<double> estimator_feature_offset(const PlseModel &model, std::span<const double> features) {
  const Layer &first = model.estimator.layers.front();
  if (features.size() + 3 != first.in_width())
    throw Error(ErrorCode::LadderMismatch, "feature vector width does not match the estimator");
  std::vector<double> offset(first.out_width());
  for (std::size_t i = 0; i < first.out_width(); ++i) {
    double v = first.bias[i];
    for (std::size_t k = 0; k < features.size(); ++k)
      v += first.weight(i, 3 + k) * features[k];
    offset[i] = v;
  }
  return offset;
}

EstimatorTape estimator_forward(const PlseModel &model, std::span<const double> feature_offset,
                                std::span<const Point3> queries) {
  const std::size_t q = queries.size();
  const auto &layers = model.estimator.layers;
  EstimatorTape tape;
  tape.queries = Matrix(3, q);
  for (std::size_t b = 0; b < q; ++b) {
    tape.queries(0, b) = queries[b].x;
    tape.queries(1, b) = queries[b].y;
    tape.queries(2, b) = queries[b].z;
  }
  tape.pre.resize(layers.size());
  tape.act.resize(layers.size());

  const Layer &first = layers.front();
  Matrix &pre0 = tape.pre[0];
  pre0 = Matrix(first.out_width(), q);
  for (std::size_t i = 0; i < first.out_width(); ++i) {
    const double w0 = first.weight(i, 0);
    const double w1 = first.weight(i, 1);
    const double w2 = first.weight(i, 2);
    const double c = feature_offset[i];
    auto row = pre0.row(i);
    const auto x = tape.queries.row(0), y = tape.queries.row(1), z = tape.queries.row(2);
    for (std::size_t b = 0; b < q; ++b)
      row[b] = c + w0 * x[b] + w1 * y[b] + w2 * z[b];
  }
  apply_activation(first.activation, pre0, tape.act[0], model.sharpness);
  for (std::size_t l = 1; l < layers.size(); ++l) {
    affine_forward(layers[l], tape.act[l - 1], tape.pre[l]);
    apply_activation(layers[l].activation, tape.pre[l], tape.act[l], model.sharpness);
  }
  tape.output.assign(tape.act.back().data.begin(), tape.act.back().data.end());
  return tape;
}

EstimatorBackward estimator_backward(const PlseModel &model, std::span<const double> features,
                                     const EstimatorTape &tape, std::span<const double> d_output,
                                     MlpParams *grads, bool want_features, bool want_queries) {
  const auto &layers = model.estimator.layers;
  const std::size_t q = tape.queries.cols;
  Matrix d_act(1, q);
  std::copy(d_output.begin(), d_output.end(), d_act.data.begin());

  Matrix d_in;
  for (std::size_t l = layers.size(); l-- > 1;) {
    activation_backward(layers[l].activation, tape.pre[l], d_act, model.sharpness);
    if (grads)
      affine_param_backward(d_act, tape.act[l - 1], grads->layers[l]);
    affine_input_backward(layers[l], d_act, d_in);
    std::swap(d_act, d_in);
  }
  const Layer &first = layers.front();
  activation_backward(first.activation, tape.pre[0], d_act, model.sharpness);

  EstimatorBackward out;
  const std::size_t width = first.out_width();
  // Feature columns are constant across the group, so their gradients only
  // need the per-unit sum over queries.
  std::vector<double> unit_sum(width, 0.0);
  for (std::size_t i = 0; i < width; ++i) {
    double s = 0.0;
    for (double v : d_act.row(i))
      s += v;
    unit_sum[i] = s;
  }
  if (grads) {
    Layer &g = grads->layers.front();
    for (std::size_t i = 0; i < width; ++i) {
      const auto dz = d_act.row(i);
      g.bias[i] += unit_sum[i];
      for (std::size_t k = 0; k < 3; ++k)
        g.weight(i, k) += ordered_dot(dz, tape.queries.row(k));
      for (std::size_t k = 0; k < features.size(); ++k)
        g.weight(i, 3 + k) += unit_sum[i] * features[k];
    }
  }
  if (want_features) {
    out.d_features.assign(features.size(), 0.0);
    for (std::size_t i = 0; i < width; ++i)
      for (std::size_t k = 0; k < features.size(); ++k)
        out.d_features[k] += first.weight(i, 3 + k) * unit_sum[i];
  }
  if (want_queries) {
    out.d_queries.assign(q, Point3{});
    for (std::size_t i = 0; i < width; ++i) {
      const double w0 = first.weight(i, 0);
      const double w1 = first.weight(i, 1);
      const double w2 = first.weight(i, 2);
      const auto dz = d_act.row(i);
      for (std::size_t b = 0; b < q; ++b) {
        out.d_queries[b].x += w0 * dz[b];
        out.d_queries[b].y += w1 * dz[b];
        out.d_queries[b].z += w2 * dz[b];
      }
    }
  }
  return out;
}

// ------------------------------------------------------------- public ops

double plse_forward(const PlseModel &model, const Point3 &query, const SamplingLadder &ladder) {
  const auto features = encode_ladder(model, ladder);
  const auto offset = estimator_feature_offset(model, features);
  return estimator_forward(model, offset, std::span(&query, 1)).output[0];
}

Point3 plse_grad_query(const PlseModel &model, const Point3 &query, const SamplingLadder &ladder) {
  const auto features = encode_ladder(model, ladder);
  const auto offset = estimator_feature_offset(model, features);
  const auto tape = estimator_forward(model, offset, std::span(&query, 1));
  const double one = 1.0;
  return estimator_backward(model, features, tape, std::span(&one, 1), nullptr, false, true).d_queries[0];
}

PlseGradients backprop_params(const PlseModel &model, const Point3 &query, const SamplingLadder &ladder,
                              double loss_grad) {
  if (ladder.levels() != model.levels())
    throw Error(ErrorCode::LadderMismatch, "ladder has " + std::to_string(ladder.levels()) +
                                               " levels, model expects " + std::to_string(model.levels()));
  PlseGradients grads = PlseGradients::zeros_like(model);
  std::vector<EncoderTape> tapes;
  std::vector<double> features;
  for (const auto &level : ladder.clouds) {
    tapes.push_back(encoder_forward(model, level));
    features.insert(features.end(), tapes.back().feature.begin(), tapes.back().feature.end());
  }
  const auto offset = estimator_feature_offset(model, features);
  const auto tape = estimator_forward(model, offset, std::span(&query, 1));
  const auto back = estimator_backward(model, features, tape, std::span(&loss_grad, 1), &grads.estimator,
                                       true, false);
  const std::size_t d = model.feature_dim;
  for (std::size_t l = 0; l < tapes.size(); ++l)
    encoder_backward(model, tapes[l], std::span(back.d_features).subspan(l * d, d), grads.encoder);
  return grads;
}

} // namespace pcup

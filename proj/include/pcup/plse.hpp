#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcup/curvature.hpp"
#include "pcup/mlp.hpp"
#include "pcup/point_cloud.hpp"

namespace pcup {

inline constexpr std::size_t kDefaultFeatureDim = 32;
inline constexpr std::size_t kDefaultEncoderHidden = 64;
inline constexpr std::size_t kDefaultSamplingSteps = 4;
inline constexpr std::array<std::size_t, 2> kEstimatorHidden{128, 64};
inline constexpr double kDefaultSharpness = 1.0;
inline constexpr const char *kModelVersion = "pcup-plse-1";

/// Progressive local surface estimator.
///
/// The encoder is shared by every ladder level: two per-point softplus layers
/// (3 -> hidden -> hidden), a coordinate-wise max over points as global
/// context, then a linear head applied to [point feature, global feature]
/// and averaged over points. The estimator maps concat(query, f_0..f_S)
/// through softplus layers to a single softplus output, so predictions are
/// never negative.
struct PlseModel {
  MlpParams encoder;
  MlpParams estimator;
  std::size_t feature_dim = kDefaultFeatureDim;
  std::size_t hidden = kDefaultEncoderHidden;
  std::size_t sampling_steps = kDefaultSamplingSteps;
  std::size_t curvature_k = kDefaultCurvatureK;
  std::size_t normals_k = kDefaultNormalsK;
  double sharpness = kDefaultSharpness; // softplus(beta x) / beta in every softplus layer
  std::string version = kModelVersion;

  std::size_t levels() const { return sampling_steps + 1; }
  std::size_t estimator_input_width() const { return 3 + feature_dim * levels(); }
  /// Checks every architecture invariant; throws BadArgument.
  void validate() const;

  friend bool operator==(const PlseModel &, const PlseModel &) = default;
};

/// Gradient set with the same shapes as a model's parameters.
struct PlseGradients {
  MlpParams encoder;
  MlpParams estimator;

  static PlseGradients zeros_like(const PlseModel &model);
  void add_scaled(const PlseGradients &other, double scale);
  std::vector<double> flatten() const;
};

std::vector<double> flatten_parameters(const PlseModel &model);
void assign_parameters(PlseModel &model, std::span<const double> flat);

PlseModel init_model(std::size_t feature_dim, std::size_t sampling_steps, std::size_t hidden,
                     std::uint64_t rng_seed);

/// Level feature of one cloud; independent of point order.
std::vector<double> encode(const PlseModel &model, const PointCloud &cloud);

/// Concatenated features f_0..f_S of a ladder.
std::vector<double> encode_ladder(const PlseModel &model, const SamplingLadder &ladder);

/// Predicted unsigned distance for one query.
double plse_forward(const PlseModel &model, const Point3 &query, const SamplingLadder &ladder);

/// d(prediction)/d(query).
Point3 plse_grad_query(const PlseModel &model, const Point3 &query, const SamplingLadder &ladder);

/// loss_grad * d(prediction)/d(parameters), through both networks and the
/// encoder pooling.
PlseGradients backprop_params(const PlseModel &model, const Point3 &query, const SamplingLadder &ladder,
                              double loss_grad);

// Lower level building blocks shared by training and inference.

/// First estimator layer's contribution from a fixed feature vector:
/// bias + W[:, 3:] * features. Computing it once per cloud makes repeated
/// evaluations cheap, and every prediction goes through it so cached and
/// uncached evaluation agree bitwise.
std::vector<double> estimator_feature_offset(const PlseModel &model, std::span<const double> features);

struct EstimatorTape {
  Matrix queries; // 3 x Q
  std::vector<Matrix> pre;
  std::vector<Matrix> act;
  std::vector<double> output;
};

EstimatorTape estimator_forward(const PlseModel &model, std::span<const double> feature_offset,
                                std::span<const Point3> queries);

struct EstimatorBackward {
  std::vector<double> d_features; // only when requested
  std::vector<Point3> d_queries;  // only when requested
};

/// Backward pass for one group of queries sharing a feature vector.
/// `d_output[b]` is dLoss/dPrediction_b. Parameter gradients are accumulated
/// into `grads` when non-null.
EstimatorBackward estimator_backward(const PlseModel &model, std::span<const double> features,
                                     const EstimatorTape &tape, std::span<const double> d_output,
                                     MlpParams *grads, bool want_features, bool want_queries);

struct EncoderTape {
  Matrix input; // 3 x N
  std::vector<Matrix> pre;
  std::vector<Matrix> act;
  std::vector<std::size_t> argmax; // per channel of the last point layer
  std::vector<double> head_input;  // [mean point feature, global max]
  std::vector<double> feature;
};

EncoderTape encoder_forward(const PlseModel &model, const PointCloud &cloud);
void encoder_backward(const PlseModel &model, const EncoderTape &tape, std::span<const double> d_feature,
                      MlpParams &grads);

} // namespace pcup

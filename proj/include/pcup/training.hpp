#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcup/curvature.hpp"
#include "pcup/neighbor_index.hpp"
#include "pcup/plse.hpp"
#include "pcup/shapes.hpp"

namespace pcup {

enum class Difficulty { Easy, Hard };
std::string_view to_string(Difficulty d);
Difficulty difficulty_from_string(std::string_view name);

struct TrainConfig {
  std::size_t epochs = 100;
  double threshold = 0.5;
  double learning_rate = 1e-3;
  std::size_t batch_size = 8;          // patches per optimizer step
  std::size_t queries_per_patch = 64;  // fresh queries per patch per step
  double query_sigma = 0.05;
  std::size_t max_steps = 0;           // 0: no cap
  bool curriculum = true;
  bool rotate = true;
  std::uint64_t seed = 0;
  std::size_t feature_dim = kDefaultFeatureDim;
  std::size_t hidden = kDefaultEncoderHidden;
  std::size_t sampling_steps = kDefaultSamplingSteps;
  std::size_t curvature_k = kDefaultCurvatureK;
  std::size_t normals_k = kDefaultNormalsK;
  double sharpness = kDefaultSharpness;
  // Projection settings used when a trained model is evaluated.
  double step_size = 0.02;
  std::size_t iterations = 10;
  double seed_sigma = 0.02;

  /// Throws BadConfig naming the offending field.
  void validate() const;

  friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

struct TrainSample {
  PatchPair patch;
  SamplingLadder ladder; // over patch.sparse
  NeighborIndex gt_index; // over patch.dense
  double global_curvature = 0.0;
  double skewness = 0.0;
  Difficulty difficulty = Difficulty::Easy;
};

/// Curvature, ladder, dense index and difficulty label for one patch.
TrainSample make_train_sample(PatchPair patch, const TrainConfig &config);

struct QueryTarget {
  Point3 query;
  double target = 0.0;
};

/// Queries are uniformly chosen sparse points plus isotropic N(0, sigma)
/// offsets; targets are exact nearest distances to the dense cloud.
std::vector<QueryTarget> generate_queries(const PointCloud &sparse, const NeighborIndex &gt_index,
                                          std::size_t count, double sigma, std::mt19937_64 &rng);

/// Hard iff gcv >= threshold. Throws OutOfRange outside [0, 1].
Difficulty classify_difficulty(double gcv, double threshold);

enum class Phase { Easy, Hard, All };
std::string_view to_string(Phase p);

struct EpochPlan {
  Phase phase = Phase::All;
  std::vector<std::size_t> samples; // visiting order
};

/// Epochs 1..ceil(E/2) visit the Easy bucket, the rest the Hard bucket. An
/// empty bucket falls back to every sample for its phase. Visiting order is
/// shuffled per epoch.
std::vector<EpochPlan> curriculum_schedule(std::span<const Difficulty> labels, std::size_t epochs,
                                           std::mt19937_64 &rng);

/// Every sample in every epoch (no curriculum).
std::vector<EpochPlan> uniform_schedule(std::size_t sample_count, std::size_t epochs, std::mt19937_64 &rng);

class AdamOptimizer {
public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  explicit AdamOptimizer(double learning_rate) : lr_(learning_rate) {}

  void step(PlseModel &model, const PlseGradients &grads);
  std::uint64_t steps() const { return t_; }

private:
  double lr_;
  std::uint64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct BatchItem {
  const SamplingLadder *ladder = nullptr;
  std::vector<Point3> queries;
  std::vector<double> targets;
};

struct LossAndGradients {
  double loss = 0.0;
  PlseGradients grads;
};

/// Mean L1 loss over every query of the batch and its exact gradient
/// (subgradient 0 at a zero residual).
LossAndGradients l1_loss_and_gradients(const PlseModel &model, std::span<const BatchItem> batch);

/// One Adam update on the batch's mean L1 loss; returns the loss. Throws
/// NonFiniteLoss.
double train_step(PlseModel &model, AdamOptimizer &optimizer, std::span<const BatchItem> batch);

struct Checkpoint {
  PlseModel model;
  TrainConfig config;
  std::uint64_t steps = 0;
  int format_version = 1;
};

struct EpochLoss {
  std::size_t epoch = 0; // 1-based
  Phase phase = Phase::All;
  double mean_loss = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLoss> trace;
};

using EpochCallback = std::function<void(const EpochLoss &)>;

/// Full curriculum training run; deterministic per config.seed.
TrainResult train(std::span<const PatchPair> dataset, const TrainConfig &config,
                  const EpochCallback &on_epoch = {});

/// `epoch,phase,mean_loss` rows.
std::string format_loss_trace_csv(std::span<const EpochLoss> trace);

inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_json(const Checkpoint &ckpt);
Checkpoint checkpoint_from_json(std::string_view text);
/// Throws Io.
void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path);
/// Throws Io, Corrupt or VersionMismatch.
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace pcup

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pcup/config.hpp"
#include "pcup/metrics.hpp"
#include "pcup/upsampler.hpp"

namespace pcup {

/// Seed for held-out patches, distinct from the training data seed.
std::uint64_t heldout_seed(std::uint64_t data_seed);

/// Training and held-out patch sets of a run config. An empty shape list
/// means sphere + torus + box.
std::vector<PatchPair> training_patches(const RunConfig &config);
std::vector<PatchPair> heldout_patches(const RunConfig &config);

/// Mean |g(q) - analytic UDF| over `count` queries drawn like training
/// queries around the patch's sparse cloud.
double heldout_udf_error(const DistanceField &field, const PatchPair &patch, std::size_t count, double sigma,
                         std::uint64_t seed);

struct PatchScores {
  double udf_error = 0.0;
  MetricReport upsampled; // against the dense patch and the frame oracle
  MetricReport baseline;  // the same seeds with zero iterations
  std::size_t collapsed = 0;
};

PatchScores score_patch(const PlseModel &model, const PatchPair &patch, double rate, const ProjectionParams &params,
                        double query_sigma, std::uint64_t seed);

struct AblationRow {
  std::size_t sampling_steps = 0;
  std::uint64_t train_steps = 0;
  double final_loss = 0.0;
  double udf_error = 0.0;
  double cd = 0.0;
  double hd = 0.0;
  double p2f = 0.0;
};

using ProgressCallback = std::function<void(const std::string &)>;

/// Trains and scores one model per sampling-step setting (means over the
/// held-out patches).
std::vector<AblationRow> ablate_sampling_steps(const RunConfig &config, std::span<const std::size_t> steps,
                                               const ProgressCallback &progress = {});
std::string format_ablation_csv(std::span<const AblationRow> rows);

struct NoiseRow {
  double tau = 0.0;
  std::uint64_t seed = 0;
  MetricReport report;
};

/// Adds N(0, tau^2) to the sparse input, upsamples, and scores against the
/// clean dense patch, for every (tau, seed).
std::vector<NoiseRow> noise_sweep(const PlseModel &model, const PatchPair &patch, std::span<const double> taus,
                                  std::span<const std::uint64_t> seeds, double rate, const ProjectionParams &params);
std::string format_noise_csv(std::span<const NoiseRow> rows);

} // namespace pcup

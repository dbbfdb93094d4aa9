#include "pcup/harness.hpp"

#include "pcup/error.hpp"
#include "pcup/format.hpp"
#include "pcup/neighbor_index.hpp"

namespace pcup {

std::uint64_t heldout_seed(std::uint64_t data_seed) { return data_seed ^ 0x5bd1e9955bd1e995ULL; }

namespace {

std::vector<ShapeOracle> shapes_or_default(const RunConfig &config) {
  if (!config.shapes.empty())
    return config.shapes;
  return {make_sphere(1.0), make_torus(1.0, 0.35), make_box({0.8, 0.6, 0.5})};
}

} // namespace

std::vector<PatchPair> training_patches(const RunConfig &config) {
  return make_patch_dataset(shapes_or_default(config), config.patches_per_shape, config.sparse_n, config.rate,
                            config.data_seed);
}

std::vector<PatchPair> heldout_patches(const RunConfig &config) {
  return make_patch_dataset(shapes_or_default(config), config.eval_patches, config.sparse_n, config.rate,
                            heldout_seed(config.data_seed));
}

double heldout_udf_error(const DistanceField &field, const PatchPair &patch, std::size_t count, double sigma,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const NeighborIndex index(patch.dense);
  const auto qt = generate_queries(patch.sparse, index, count, sigma, rng);
  std::vector<Point3> qs;
  qs.reserve(qt.size());
  for (const auto &x : qt)
    qs.push_back(x.query);
  std::vector<FieldSample> out(qs.size());
  field.evaluate(qs, out);
  const ShapeOracle frame = patch.frame_oracle();
  double sum = 0.0;
  for (std::size_t i = 0; i < qs.size(); ++i)
    sum += std::abs(out[i].distance - analytic_udf(frame, qs[i]).distance);
  return sum / static_cast<double>(qs.size());
}

PatchScores score_patch(const PlseModel &model, const PatchPair &patch, double rate, const ProjectionParams &params,
                        double query_sigma, std::uint64_t seed) {
  const LearnedField field = prepare_field(model, patch.sparse);
  const SurfaceRef surface = patch.frame_oracle();
  PatchScores s;
  s.udf_error = heldout_udf_error(field, patch, 2000, query_sigma, seed);
  std::mt19937_64 rng(seed);
  const PointCloud seeds = seed_queries(patch.sparse, rate, params.seed_sigma, rng);
  const PointCloud pred = project(field, seeds, params);
  s.upsampled = evaluate(pred, patch.dense, &surface);
  s.baseline = evaluate(seeds, patch.dense, &surface);
  s.collapsed = count_collapsed(pred);
  return s;
}

std::vector<AblationRow> ablate_sampling_steps(const RunConfig &config, std::span<const std::size_t> steps,
                                               const ProgressCallback &progress) {
  const auto train_set = training_patches(config);
  const auto eval_set = heldout_patches(config);
  std::vector<AblationRow> rows;
  for (std::size_t s : steps) {
    TrainConfig tc = config.train;
    tc.sampling_steps = s;
    if (progress)
      progress("training with " + std::to_string(s) + " sampling steps");
    const TrainResult r = train(train_set, tc);
    AblationRow row;
    row.sampling_steps = s;
    row.train_steps = r.checkpoint.steps;
    row.final_loss = r.trace.empty() ? 0.0 : r.trace.back().mean_loss;
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
      const PatchScores ps = score_patch(r.checkpoint.model, eval_set[i], static_cast<double>(config.rate),
                                         config.projection(), tc.query_sigma, config.data_seed + i);
      row.udf_error += ps.udf_error;
      row.cd += ps.upsampled.cd;
      row.hd += ps.upsampled.hd;
      row.p2f += ps.upsampled.p2f.value_or(0.0);
    }
    const double n = static_cast<double>(eval_set.size());
    row.udf_error /= n;
    row.cd /= n;
    row.hd /= n;
    row.p2f /= n;
    rows.push_back(row);
  }
  return rows;
}

std::string format_ablation_csv(std::span<const AblationRow> rows) {
  std::string out = "sampling_steps,train_steps,final_loss,udf_error,cd,hd,p2f,cd_x1e3,hd_x1e3,p2f_x1e3\n";
  for (const auto &r : rows) {
    out += std::to_string(r.sampling_steps) + "," + std::to_string(r.train_steps) + "," + shortest(r.final_loss) +
           "," + shortest(r.udf_error) + "," + shortest(r.cd) + "," + shortest(r.hd) + "," + shortest(r.p2f) + "," +
           significant(r.cd * MetricReport::kDisplayScale, 6) + "," +
           significant(r.hd * MetricReport::kDisplayScale, 6) + "," +
           significant(r.p2f * MetricReport::kDisplayScale, 6) + "\n";
  }
  return out;
}

std::vector<NoiseRow> noise_sweep(const PlseModel &model, const PatchPair &patch, std::span<const double> taus,
                                  std::span<const std::uint64_t> seeds, double rate, const ProjectionParams &params) {
  const SurfaceRef surface = patch.frame_oracle();
  std::vector<NoiseRow> rows;
  for (double tau : taus) {
    for (std::uint64_t seed : seeds) {
      const PointCloud noisy = add_noise(patch.sparse, tau, seed);
      const LearnedField field = prepare_field(model, noisy);
      std::mt19937_64 rng(seed);
      const PointCloud pred = upsample(field, noisy, rate, params, rng);
      rows.push_back({tau, seed, evaluate(pred, patch.dense, &surface)});
    }
  }
  return rows;
}

std::string format_noise_csv(std::span<const NoiseRow> rows) {
  std::string out = "tau,seed,cd,hd,p2f,cd_x1e3,hd_x1e3,p2f_x1e3\n";
  for (const auto &r : rows) {
    const double p = r.report.p2f.value_or(0.0);
    out += shortest(r.tau) + "," + std::to_string(r.seed) + "," + shortest(r.report.cd) + "," +
           shortest(r.report.hd) + "," + shortest(p) + "," + significant(r.report.cd * MetricReport::kDisplayScale, 6) +
           "," + significant(r.report.hd * MetricReport::kDisplayScale, 6) + "," +
           significant(p * MetricReport::kDisplayScale, 6) + "\n";
  }
  return out;
}

} // namespace pcup

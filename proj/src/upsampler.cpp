#include "pcup/upsampler.hpp"

#include <algorithm>
#include <cmath>

#include "pcup/error.hpp"
#include "pcup/format.hpp"
#include "pcup/neighbor_index.hpp"

namespace pcup {

namespace {
constexpr std::size_t kChunk = 256;
}

void ProjectionParams::validate() const {
  if (!(step_size >= 0.0) || !std::isfinite(step_size))
    throw Error(ErrorCode::BadArgument, "lambda must be a finite value >= 0");
  if (!(seed_sigma >= 0.0) || !std::isfinite(seed_sigma))
    throw Error(ErrorCode::BadArgument, "sigma_seed must be a finite value >= 0");
}

FieldSample DistanceField::evaluate(const Point3 &q) const {
  FieldSample s;
  evaluate(std::span(&q, 1), std::span(&s, 1));
  return s;
}

LearnedField::LearnedField(PlseModel model, SamplingLadder ladder)
    : model_(std::move(model)), ladder_(std::move(ladder)) {
  features_ = encode_ladder(model_, ladder_);
  offset_ = estimator_feature_offset(model_, features_);
}

void LearnedField::evaluate(std::span<const Point3> queries, std::span<FieldSample> out) const {
  if (out.size() != queries.size())
    throw Error(ErrorCode::BadArgument, "output span does not match the query count");
  const std::vector<double> ones(std::min(kChunk, queries.size()), 1.0);
  for (std::size_t start = 0; start < queries.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, queries.size() - start);
    const auto chunk = queries.subspan(start, n);
    const auto tape = estimator_forward(model_, offset_, chunk);
    const auto back =
        estimator_backward(model_, features_, tape, std::span(ones).first(n), nullptr, false, true);
    for (std::size_t i = 0; i < n; ++i)
      out[start + i] = {tape.output[i], back.d_queries[i], true};
  }
}

void OracleField::evaluate(std::span<const Point3> queries, std::span<FieldSample> out) const {
  if (out.size() != queries.size())
    throw Error(ErrorCode::BadArgument, "output span does not match the query count");
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const UdfSample u = analytic_udf(oracle_, queries[i]);
    out[i] = {u.distance, u.gradient, u.gradient_defined};
  }
}

LearnedField prepare_field(const PlseModel &model, const PointCloud &sparse) {
  const std::size_t need = std::size_t{1} << model.sampling_steps;
  if (sparse.size() < need)
    throw Error(ErrorCode::TooFewPoints, "input has " + std::to_string(sparse.size()) + " points; " +
                                             std::to_string(model.sampling_steps) +
                                             " sampling steps need at least " + std::to_string(need));
  const CurvatureField field = compute_curvature(sparse, model.curvature_k, model.normals_k);
  return LearnedField(model, curvature_sample(sparse, field, model.sampling_steps));
}

std::size_t upsampled_count(std::size_t n, double rate) {
  if (!(rate > 1.0) || !std::isfinite(rate))
    throw Error(ErrorCode::BadRate, "rate must be greater than 1, got " + shortest(rate));
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

PointCloud seed_queries(const PointCloud &sparse, double rate, double sigma, std::mt19937_64 &rng) {
  const std::size_t count = upsampled_count(sparse.size(), rate);
  if (sparse.empty())
    throw Error(ErrorCode::EmptyCloud, "cannot seed queries from an empty cloud");
  if (!(sigma >= 0.0))
    throw Error(ErrorCode::BadArgument, "seed sigma must be >= 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  PointCloud out;
  out.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point3 q = sparse[i % sparse.size()];
    if (sigma > 0.0) {
      const double dx = gauss(rng), dy = gauss(rng), dz = gauss(rng);
      q += Point3{dx, dy, dz} * sigma;
    }
    out.points.push_back(q);
  }
  return out;
}

PointCloud project(const DistanceField &field, const PointCloud &queries, const ProjectionParams &params) {
  params.validate();
  PointCloud out = queries;
  std::vector<FieldSample> samples(out.size());
  for (std::size_t t = 0; t < params.iterations; ++t) {
    field.evaluate(out.points, samples);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!samples[i].gradient_defined)
        continue;
      const Point3 next = out[i] - samples[i].gradient * params.step_size;
      if (!is_finite(next) || !std::isfinite(samples[i].distance))
        throw Error(ErrorCode::NonFiniteState, "query " + std::to_string(i) + " became non-finite at iteration " +
                                                   std::to_string(t + 1));
      out.points[i] = next;
    }
  }
  return out;
}

PointCloud upsample(const DistanceField &field, const PointCloud &sparse, double rate,
                    const ProjectionParams &params, std::mt19937_64 &rng) {
  params.validate();
  return project(field, seed_queries(sparse, rate, params.seed_sigma, rng), params);
}

std::size_t count_collapsed(const PointCloud &cloud, double tol) {
  if (cloud.size() < 2)
    return 0;
  const NeighborIndex index(cloud);
  std::size_t collapsed = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (const auto &n : index.knn(cloud[i], std::min<std::size_t>(8, cloud.size()))) {
      if (n.distance > tol)
        break;
      if (n.index < i) {
        ++collapsed;
        break;
      }
    }
  }
  return collapsed;
}

} // namespace pcup

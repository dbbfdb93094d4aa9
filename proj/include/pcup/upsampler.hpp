#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "pcup/curvature.hpp"
#include "pcup/plse.hpp"
#include "pcup/point_cloud.hpp"
#include "pcup/shapes.hpp"

namespace pcup {

struct ProjectionParams {
  double step_size = 0.02; // lambda
  std::size_t iterations = 10;
  double seed_sigma = 0.02;

  /// Throws BadArgument.
  void validate() const;
};

struct FieldSample {
  double distance = 0.0;
  Point3 gradient;
  bool gradient_defined = true;
};

class DistanceField {
public:
  virtual ~DistanceField() = default;
  /// out.size() must equal queries.size().
  virtual void evaluate(std::span<const Point3> queries, std::span<FieldSample> out) const = 0;

  FieldSample evaluate(const Point3 &q) const;
};

/// Learned field over one sparse cloud. Ladder features and the estimator's
/// feature offset are computed once at construction.
class LearnedField final : public DistanceField {
public:
  LearnedField(PlseModel model, SamplingLadder ladder);

  using DistanceField::evaluate;
  void evaluate(std::span<const Point3> queries, std::span<FieldSample> out) const override;

  const PlseModel &model() const { return model_; }
  const SamplingLadder &ladder() const { return ladder_; }
  const std::vector<double> &features() const { return features_; }

private:
  PlseModel model_;
  SamplingLadder ladder_;
  std::vector<double> features_;
  std::vector<double> offset_;
};

class OracleField final : public DistanceField {
public:
  explicit OracleField(ShapeOracle oracle) : oracle_(std::move(oracle)) {}

  using DistanceField::evaluate;
  void evaluate(std::span<const Point3> queries, std::span<FieldSample> out) const override;

  const ShapeOracle &oracle() const { return oracle_; }

private:
  ShapeOracle oracle_;
};

/// Builds the ladder with the model's own K settings and caches its
/// features. Throws TooFewPoints when sparse.size() < 2^S.
LearnedField prepare_field(const PlseModel &model, const PointCloud &sparse);

/// round(rate * n); throws BadRate unless rate > 1 and finite.
std::size_t upsampled_count(std::size_t n, double rate);

/// Query i is sparse[i mod N] plus N(0, sigma^2) per axis.
PointCloud seed_queries(const PointCloud &sparse, double rate, double sigma, std::mt19937_64 &rng);

/// T steps of q <- q - lambda * grad. A query whose gradient is undefined
/// stays put for that step. Throws NonFiniteState naming the query.
PointCloud project(const DistanceField &field, const PointCloud &queries, const ProjectionParams &params);

PointCloud upsample(const DistanceField &field, const PointCloud &sparse, double rate,
                    const ProjectionParams &params, std::mt19937_64 &rng);

/// Points that coincide (within tol) with an earlier point.
std::size_t count_collapsed(const PointCloud &cloud, double tol = 1e-9);

} // namespace pcup

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pcup/point_cloud.hpp"
#include "pcup/shapes.hpp"

namespace pcup {

/// CD = (mean_a min_b |p - q| + mean_b min_a |p - q|) / 2, first power.
double chamfer(const PointCloud &a, const PointCloud &b);

/// Symmetric Hausdorff distance.
double hausdorff(const PointCloud &a, const PointCloud &b);

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;

  /// Throws EmptyMesh without triangles, Malformed on out-of-range indices
  /// or triangles of area <= 1e-12.
  void validate() const;
};

using SurfaceRef = std::variant<TriangleMesh, ShapeOracle>;

/// Exact distance from p to triangle abc (closest-point region analysis).
double point_triangle_distance(const Point3 &p, const Point3 &a, const Point3 &b, const Point3 &c);

/// Mean exact point-to-surface distance.
double p2f(const PointCloud &pred, const SurfaceRef &surface);

/// Independent N(0, tau) perturbation of every coordinate.
PointCloud add_noise(const PointCloud &cloud, double tau, std::uint64_t rng_seed);

/// Raw metric values; display scaling happens only when formatting.
struct MetricReport {
  double cd = 0.0;
  double hd = 0.0;
  std::optional<double> p2f;

  static constexpr double kDisplayScale = 1e3;
};

MetricReport evaluate(const PointCloud &pred, const PointCloud &gt, const SurfaceRef *surface = nullptr);

/// `metric,value_raw,value_x1e3` rows.
std::string format_report_csv(const MetricReport &report);

} // namespace pcup

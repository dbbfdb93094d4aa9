#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pcup/point_cloud.hpp"

namespace pcup {

struct Sphere {
  double radius = 1.0;
};
struct Box {
  Point3 half_extents{1.0, 1.0, 1.0};
};
/// Ring around the local z axis.
struct Torus {
  double major_radius = 2.0;
  double minor_radius = 0.5;
};
/// Points x with normal . x = offset. Surface sampling covers the square of
/// half-size `extent` centred at offset * normal.
struct Plane {
  Point3 normal{0.0, 0.0, 1.0};
  double offset = 0.0;
  double extent = 1.0;
};

using ShapeGeometry = std::variant<Sphere, Box, Torus, Plane>;

/// Analytic surface with an exact unsigned distance function. World points
/// map to the local frame through x_local = R^T (x - translation).
struct ShapeOracle {
  ShapeGeometry geometry;
  Rotation rotation;
  Point3 translation;

  /// Throws BadArgument unless sizes are positive and the rotation is
  /// orthonormal.
  void validate() const;
  /// The same surface expressed in the frame of `t` (x' = (x - c) / s).
  ShapeOracle in_frame(const NormalizationTransform &t) const;
  std::string kind_name() const;
};

ShapeOracle make_sphere(double radius);
ShapeOracle make_box(const Point3 &half_extents);
ShapeOracle make_torus(double major_radius, double minor_radius);
ShapeOracle make_plane(const Point3 &normal, double offset, double extent = 1.0);

/// Parses `sphere:r=1`, `torus:R=2,r=0.5`, `box:hx=1,hy=1,hz=1`,
/// `plane:nx=0,ny=0,nz=1,off=0[,extent=1]`. Omitted parameters keep their
/// defaults. Throws BadArgument.
ShapeOracle parse_oracle_spec(std::string_view spec);
std::string format_oracle_spec(const ShapeOracle &oracle);

struct UdfSample {
  double distance = 0.0;
  Point3 gradient;
  /// False on the medial axis and on the surface itself, where the UDF has
  /// no gradient; `gradient` is then zero.
  bool gradient_defined = false;
};

UdfSample analytic_udf(const ShapeOracle &oracle, const Point3 &q);

/// Area-uniform samples of the surface; deterministic per seed.
PointCloud sample_surface(const ShapeOracle &oracle, std::size_t n, std::uint64_t rng_seed);

/// Sparse/dense training pair. Both clouds live in the normalized frame of
/// the dense cloud; `transform` maps the source oracle's frame into it.
struct PatchPair {
  PointCloud sparse;
  PointCloud dense;
  ShapeOracle source;
  NormalizationTransform transform;

  /// Source surface expressed in the patch frame.
  ShapeOracle frame_oracle() const { return source.in_frame(transform); }
};

inline constexpr std::size_t kDefaultPoolFactor = 4;

/// For every oracle, `patches_per_shape` patches. Each patch takes a random
/// seed point from a pool of pool_factor * rate * sparse_n surface samples,
/// keeps its rate * sparse_n nearest pool points (in distance order) as the
/// dense cloud and the FPS subset of those as the sparse cloud, then
/// normalizes both by the dense cloud's transform.
std::vector<PatchPair> make_patch_dataset(const std::vector<ShapeOracle> &oracles,
                                          std::size_t patches_per_shape, std::size_t sparse_n,
                                          std::size_t rate, std::uint64_t rng_seed,
                                          std::size_t pool_factor = kDefaultPoolFactor);

} // namespace pcup

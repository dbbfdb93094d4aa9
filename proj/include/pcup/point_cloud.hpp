#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace pcup {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double &operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Point3 &operator+=(const Point3 &o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Point3 &operator-=(const Point3 &o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  Point3 &operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend Point3 operator+(Point3 a, const Point3 &b) { return a += b; }
  friend Point3 operator-(Point3 a, const Point3 &b) { return a -= b; }
  friend Point3 operator*(Point3 a, double s) { return a *= s; }
  friend Point3 operator*(double s, Point3 a) { return a *= s; }
  friend Point3 operator/(Point3 a, double s) { return a *= (1.0 / s); }
  friend Point3 operator-(const Point3 &a) { return {-a.x, -a.y, -a.z}; }
  friend bool operator==(const Point3 &, const Point3 &) = default;
};

inline double dot(const Point3 &a, const Point3 &b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline Point3 cross(const Point3 &a, const Point3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Point3 &a) { return std::sqrt(dot(a, a)); }
inline double distance(const Point3 &a, const Point3 &b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}
inline bool is_finite(const Point3 &p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Ordered point set. Indices are stable identifiers for every operation.
struct PointCloud {
  std::vector<Point3> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Point3 &operator[](std::size_t i) const { return points[i]; }
  Point3 &operator[](std::size_t i) { return points[i]; }
  auto begin() const { return points.begin(); }
  auto end() const { return points.end(); }
  std::span<const Point3> view() const { return points; }

  friend bool operator==(const PointCloud &, const PointCloud &) = default;
};

/// Subset of a cloud in the order the indices are given.
PointCloud gather(const PointCloud &cloud, std::span<const std::size_t> indices);

/// Row-major 3x3 rotation matrix.
struct Rotation {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Rotation identity() { return {}; }
  /// Uniformly distributed rotation from three uniform [0,1) numbers
  /// (unit quaternion construction).
  static Rotation from_uniform(double u1, double u2, double u3);
  static Rotation from_axis_angle(const Point3 &axis, double angle);

  Point3 apply(const Point3 &p) const {
    return {m[0] * p.x + m[1] * p.y + m[2] * p.z,
            m[3] * p.x + m[4] * p.y + m[5] * p.z,
            m[6] * p.x + m[7] * p.y + m[8] * p.z};
  }
  Point3 apply_inverse(const Point3 &p) const {
    return {m[0] * p.x + m[3] * p.y + m[6] * p.z,
            m[1] * p.x + m[4] * p.y + m[7] * p.z,
            m[2] * p.x + m[5] * p.y + m[8] * p.z};
  }
  Rotation transposed() const;
  Rotation operator*(const Rotation &o) const;
  /// Max deviation of R^T R from identity.
  double orthonormality_error() const;
};

PointCloud rotate(const PointCloud &cloud, const Rotation &r);

struct NormalizationTransform {
  Point3 centroid;
  double scale = 1.0;

  Point3 apply(const Point3 &p) const { return (p - centroid) / scale; }
  Point3 invert(const Point3 &p) const { return p * scale + centroid; }
  PointCloud apply(const PointCloud &cloud) const;
  PointCloud invert(const PointCloud &cloud) const;
};

/// Transform that centers `cloud` at its centroid and scales its max point
/// norm to 1. Requires at least two distinct points.
NormalizationTransform fit_normalization(const PointCloud &cloud);

std::pair<PointCloud, NormalizationTransform> normalize(const PointCloud &cloud);

Point3 centroid(const PointCloud &cloud);

} // namespace pcup

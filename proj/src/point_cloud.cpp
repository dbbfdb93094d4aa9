#include "pcup/point_cloud.hpp"

#include <algorithm>
#include <numbers>

#include "pcup/error.hpp"

namespace pcup {

PointCloud gather(const PointCloud &cloud, std::span<const std::size_t> indices) {
  std::vector<Point3> out;
  out.reserve(indices.size());
  for (std::size_t i : indices)
    out.push_back(cloud[i]);
  return PointCloud(std::move(out));
}

Rotation Rotation::from_uniform(double u1, double u2, double u3) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double qx = a * std::sin(two_pi * u2);
  const double qy = a * std::cos(two_pi * u2);
  const double qz = b * std::sin(two_pi * u3);
  const double qw = b * std::cos(two_pi * u3);
  Rotation r;
  r.m = {1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw),
         2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw),
         2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)};
  return r;
}

Rotation Rotation::from_axis_angle(const Point3 &axis, double angle) {
  const Point3 k = axis / norm(axis);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double t = 1.0 - c;
  Rotation r;
  r.m = {t * k.x * k.x + c,       t * k.x * k.y - s * k.z, t * k.x * k.z + s * k.y,
         t * k.x * k.y + s * k.z, t * k.y * k.y + c,       t * k.y * k.z - s * k.x,
         t * k.x * k.z - s * k.y, t * k.y * k.z + s * k.x, t * k.z * k.z + c};
  return r;
}

Rotation Rotation::transposed() const {
  Rotation r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.m[i * 3 + j] = m[j * 3 + i];
  return r;
}

Rotation Rotation::operator*(const Rotation &o) const {
  Rotation r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        s += m[i * 3 + k] * o.m[k * 3 + j];
      r.m[i * 3 + j] = s;
    }
  return r;
}

double Rotation::orthonormality_error() const {
  const Rotation p = transposed() * *this;
  double err = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      err = std::max(err, std::abs(p.m[i * 3 + j] - (i == j ? 1.0 : 0.0)));
  return err;
}

PointCloud rotate(const PointCloud &cloud, const Rotation &r) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto &p : cloud)
    out.push_back(r.apply(p));
  return PointCloud(std::move(out));
}

PointCloud NormalizationTransform::apply(const PointCloud &cloud) const {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto &p : cloud)
    out.push_back(apply(p));
  return PointCloud(std::move(out));
}

PointCloud NormalizationTransform::invert(const PointCloud &cloud) const {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto &p : cloud)
    out.push_back(invert(p));
  return PointCloud(std::move(out));
}

Point3 centroid(const PointCloud &cloud) {
  if (cloud.empty())
    throw Error(ErrorCode::EmptyCloud, "centroid of an empty cloud");
  Point3 sum;
  for (const auto &p : cloud)
    sum += p;
  return sum / static_cast<double>(cloud.size());
}

NormalizationTransform fit_normalization(const PointCloud &cloud) {
  if (cloud.empty())
    throw Error(ErrorCode::EmptyCloud, "cannot normalize an empty cloud");
  NormalizationTransform t;
  t.centroid = centroid(cloud);
  double radius = 0.0;
  for (const auto &p : cloud)
    radius = std::max(radius, distance(p, t.centroid));
  if (!(radius > 0.0))
    throw Error(ErrorCode::DegenerateCloud, "all points are identical");
  t.scale = radius;
  return t;
}

std::pair<PointCloud, NormalizationTransform> normalize(const PointCloud &cloud) {
  NormalizationTransform t = fit_normalization(cloud);
  return {t.apply(cloud), t};
}

} // namespace pcup

#pragma once

// Brute-force reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "pcup/neighbor_index.hpp"
#include "pcup/point_cloud.hpp"

namespace pcup::test {

inline PointCloud random_cloud(std::mt19937_64 &rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point3> pts(n);
  for (auto &p : pts)
    p = {u(rng), u(rng), u(rng)};
  return PointCloud(std::move(pts));
}

inline Point3 random_point(std::mt19937_64 &rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline std::vector<Neighbor> brute_knn(const PointCloud &cloud, const Point3 &q, std::size_t k) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double dx = cloud[i].x - q.x, dy = cloud[i].y - q.y, dz = cloud[i].z - q.z;
    all.push_back({i, std::sqrt(dx * dx + dy * dy + dz * dz)});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor &a, const Neighbor &b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  all.resize(k);
  return all;
}

inline double brute_nearest(const PointCloud &cloud, const Point3 &q) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &p : cloud) {
    const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
    best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
  }
  return best;
}

inline double brute_chamfer(const PointCloud &a, const PointCloud &b) {
  double sa = 0.0, sb = 0.0;
  for (const auto &p : a)
    sa += brute_nearest(b, p);
  for (const auto &p : b)
    sb += brute_nearest(a, p);
  return 0.5 * (sa / a.size() + sb / b.size());
}

inline double brute_hausdorff(const PointCloud &a, const PointCloud &b) {
  double h = 0.0;
  for (const auto &p : a)
    h = std::max(h, brute_nearest(b, p));
  for (const auto &p : b)
    h = std::max(h, brute_nearest(a, p));
  return h;
}

/// Exhaustive greedy farthest point selection.
inline std::vector<std::size_t> brute_fps(const PointCloud &cloud, std::size_t m, std::size_t start) {
  std::vector<std::size_t> sel{start};
  while (sel.size() < m) {
    std::size_t best_i = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (std::find(sel.begin(), sel.end(), i) != sel.end())
        continue;
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t s : sel)
        dmin = std::min(dmin, distance(cloud[i], cloud[s]));
      if (dmin > best_d) {
        best_d = dmin;
        best_i = i;
      }
    }
    sel.push_back(best_i);
  }
  return sel;
}

/// Point-triangle distance by projection onto the supporting plane with an
/// inside test, falling back to the closest of the three clamped edges.
inline double brute_point_triangle(const Point3 &p, const Point3 &a, const Point3 &b, const Point3 &c) {
  auto seg = [](const Point3 &p, const Point3 &s0, const Point3 &s1) {
    const Point3 d = s1 - s0;
    double t = dot(p - s0, d) / dot(d, d);
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, s0 + d * t);
  };
  const Point3 n = cross(b - a, c - a);
  const double nn = dot(n, n);
  const Point3 proj = p - n * (dot(p - a, n) / nn);
  const double w0 = dot(cross(b - proj, c - proj), n);
  const double w1 = dot(cross(c - proj, a - proj), n);
  const double w2 = dot(cross(a - proj, b - proj), n);
  if (w0 >= 0 && w1 >= 0 && w2 >= 0)
    return std::abs(dot(p - a, n)) / std::sqrt(nn);
  return std::min({seg(p, a, b), seg(p, b, c), seg(p, c, a)});
}

} // namespace pcup::test

#include <numbers>

namespace pcup::test {

/// Near-uniform deterministic sphere sampling (golden-angle spiral).
inline PointCloud fibonacci_sphere(std::size_t n, double radius = 1.0) {
  std::vector<Point3> pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * static_cast<double>(i);
    pts.push_back(Point3{r * std::cos(phi), r * std::sin(phi), z} * radius);
  }
  return PointCloud(std::move(pts));
}

/// Irregular points on the plane z = 0 inside [-1, 1]^2.
inline PointCloud plane_patch(std::mt19937_64 &rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point3> pts(n);
  for (auto &p : pts)
    p = {u(rng), u(rng), 0.0};
  return PointCloud(std::move(pts));
}

/// Per-point chord relation on a sphere of radius r: for a neighbour at
/// chord length d the unit chord makes |cos| = d / (2 r) with the radial
/// normal, so the umbrella value is the mean of d_i / (2 r) over the K
/// nearest other points.
inline std::vector<double> sphere_chord_curvature(const PointCloud &cloud, std::size_t k, double r) {
  std::vector<double> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto nb = brute_knn(cloud, cloud[i], k + 1);
    double s = 0.0;
    std::size_t used = 0;
    for (const auto &n : nb) {
      if (n.index == i || used == k)
        continue;
      s += n.distance / (2.0 * r);
      ++used;
    }
    out.push_back(s / static_cast<double>(k));
  }
  return out;
}

} // namespace pcup::test

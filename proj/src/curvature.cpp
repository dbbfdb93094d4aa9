#include "pcup/curvature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "pcup/error.hpp"
#include "pcup/neighbor_index.hpp"

namespace pcup {

NormalField estimate_normals(const PointCloud &cloud, std::size_t k_normals) {
  if (k_normals < 3)
    throw Error(ErrorCode::BadCount, "normal estimation needs k_normals >= 3");
  if (cloud.size() < k_normals)
    throw Error(ErrorCode::TooFewPoints, "cloud has " + std::to_string(cloud.size()) +
                                             " points, normal estimation needs " +
                                             std::to_string(k_normals));
  const NeighborIndex index(cloud);
  NormalField field;
  field.k_normals = k_normals;
  field.normals.reserve(cloud.size());
  for (const auto &p : cloud) {
    const auto nbrs = index.knn(p, k_normals);
    Point3 mean;
    for (const auto &n : nbrs)
      mean += cloud[n.index];
    mean = mean / static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto &n : nbrs) {
      const Point3 d = cloud[n.index] - mean;
      const Eigen::Vector3d v(d.x, d.y, d.z);
      cov += v * v.transpose();
    }
    cov /= static_cast<double>(nbrs.size());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    Eigen::Vector3d n = solver.eigenvectors().col(0);
    n.normalize();
    int largest = 0;
    for (int a = 1; a < 3; ++a)
      if (std::abs(n[a]) > std::abs(n[largest]))
        largest = a;
    if (n[largest] < 0.0)
      n = -n;
    field.normals.push_back({n[0], n[1], n[2]});
  }
  return field;
}

CurvatureField curvature_values(const PointCloud &cloud, const NormalField &normals, std::size_t k) {
  if (k < 1)
    throw Error(ErrorCode::BadCount, "curvature needs K >= 1");
  if (cloud.size() <= k)
    throw Error(ErrorCode::TooFewPoints, "cloud has " + std::to_string(cloud.size()) +
                                             " points, curvature with K=" + std::to_string(k) +
                                             " needs more");
  if (normals.normals.size() != cloud.size())
    throw Error(ErrorCode::BadArgument, "normal field does not match the cloud");

  const NeighborIndex index(cloud);
  CurvatureField field;
  field.k = k;
  field.values.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3 &p = cloud[i];
    const Point3 &n = normals.normals[i];
    // k+1 neighbours so that p itself can be dropped; when p has duplicates
    // any one copy with index i is the one removed.
    const auto nbrs = index.knn(p, k + 1);
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto &nb : nbrs) {
      if (nb.index == i)
        continue;
      if (used == k)
        break;
      ++used;
      const Point3 x = cloud[nb.index] - p;
      const double len = norm(x);
      if (len > 0.0)
        sum += std::min(1.0, std::abs(dot(x, n)) / len);
    }
    field.values.push_back(sum / static_cast<double>(k));
  }
  return field;
}

CurvatureField compute_curvature(const PointCloud &cloud, std::size_t k, std::size_t k_normals) {
  return curvature_values(cloud, estimate_normals(cloud, k_normals), k);
}

double global_curvature(const CurvatureField &field) {
  if (field.values.empty())
    throw Error(ErrorCode::EmptyCloud, "global curvature of an empty field");
  double sum = 0.0;
  for (double v : field.values)
    sum += v;
  return sum / static_cast<double>(field.values.size());
}

double curvature_skewness(const CurvatureField &field) {
  const double mean = global_curvature(field);
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : field.values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  const auto n = static_cast<double>(field.values.size());
  m2 /= n;
  m3 /= n;
  // Rounding noise in a constant field must not turn into a skew of +-1.
  if (m2 <= 1e-24 * std::max(1.0, mean * mean))
    return 0.0;
  return m3 / std::pow(m2, 1.5);
}

SamplingLadder curvature_sample(const PointCloud &cloud, const CurvatureField &field, std::size_t steps) {
  if (cloud.empty())
    throw Error(ErrorCode::EmptyCloud, "cannot sample an empty cloud");
  if (field.values.size() != cloud.size())
    throw Error(ErrorCode::BadArgument, "curvature field does not match the cloud");
  if (steps >= 64 || (cloud.size() >> steps) < 1)
    throw Error(ErrorCode::TooManySteps, std::to_string(steps) + " halvings of " +
                                             std::to_string(cloud.size()) + " points leave nothing");

  std::vector<std::size_t> ranked(cloud.size());
  std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    return field.values[a] > field.values[b];
  });

  SamplingLadder ladder;
  std::vector<std::size_t> all(cloud.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  ladder.indices.push_back(std::move(all));
  ladder.clouds.push_back(cloud);
  for (std::size_t s = 1; s <= steps; ++s) {
    const std::size_t m = cloud.size() >> s;
    std::vector<std::size_t> keep(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(m));
    ladder.clouds.push_back(gather(cloud, keep));
    ladder.indices.push_back(std::move(keep));
  }
  return ladder;
}

SamplingLadder reindex_ladder(const SamplingLadder &ladder, const PointCloud &source) {
  SamplingLadder out;
  out.indices = ladder.indices;
  out.clouds.reserve(ladder.indices.size());
  for (const auto &idx : ladder.indices)
    out.clouds.push_back(gather(source, idx));
  return out;
}

std::vector<std::size_t> fps_indices(const PointCloud &cloud, std::size_t m, std::size_t start_index) {
  if (m < 1 || m > cloud.size())
    throw Error(ErrorCode::BadCount, "fps count " + std::to_string(m) + " for a cloud of " +
                                         std::to_string(cloud.size()) + " points");
  if (start_index >= cloud.size())
    throw Error(ErrorCode::BadCount, "fps start index " + std::to_string(start_index) + " out of range");

  std::vector<std::size_t> selected;
  selected.reserve(m);
  std::vector<double> min_dist(cloud.size(), std::numeric_limits<double>::infinity());
  std::size_t current = start_index;
  for (std::size_t step = 0; step < m; ++step) {
    selected.push_back(current);
    min_dist[current] = -1.0;
    const Point3 &c = cloud[current];
    std::size_t next = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (min_dist[i] < 0.0)
        continue;
      min_dist[i] = std::min(min_dist[i], distance(cloud[i], c));
      if (min_dist[i] > best) {
        best = min_dist[i];
        next = i;
      }
    }
    current = next;
  }
  return selected;
}

PointCloud fps(const PointCloud &cloud, std::size_t m, std::size_t start_index) {
  const auto idx = fps_indices(cloud, m, start_index);
  return gather(cloud, idx);
}

} // namespace pcup

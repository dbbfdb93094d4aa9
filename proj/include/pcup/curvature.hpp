#pragma once

#include <cstddef>
#include <vector>

#include "pcup/point_cloud.hpp"

namespace pcup {

inline constexpr std::size_t kDefaultNormalsK = 16;
inline constexpr std::size_t kDefaultCurvatureK = 16;

struct NormalField {
  std::vector<Point3> normals; // unit length, sign canonicalized
  std::size_t k_normals = 0;
};

/// Umbrella curvature values, one per point, each in [0, 1].
struct CurvatureField {
  std::vector<double> values;
  std::size_t k = 0;
};

/// Nested curvature-ranked subsets of one cloud.
///
/// Level 0 is the whole cloud; level s keeps the floor(n / 2^s) points with
/// the highest curvature value (ties to the lower index), listed in rank
/// order.
struct SamplingLadder {
  std::vector<PointCloud> clouds;
  std::vector<std::vector<std::size_t>> indices;

  std::size_t levels() const { return clouds.size(); }
  std::size_t steps() const { return clouds.empty() ? 0 : clouds.size() - 1; }
};

/// Local-PCA normals: eigenvector of the smallest eigenvalue of the covariance
/// of each point's k_normals nearest neighbours (the point included). The
/// component of largest magnitude is made positive.
NormalField estimate_normals(const PointCloud &cloud, std::size_t k_normals = kDefaultNormalsK);

/// c_p = mean over the K nearest neighbours p_i != p of |unit(p_i - p) . n_p|.
/// A coincident neighbour contributes 0.
CurvatureField curvature_values(const PointCloud &cloud, const NormalField &normals,
                                std::size_t k = kDefaultCurvatureK);

/// Normals (k_normals) followed by curvature values (k) in one call.
CurvatureField compute_curvature(const PointCloud &cloud, std::size_t k = kDefaultCurvatureK,
                                 std::size_t k_normals = kDefaultNormalsK);

/// Mean of the per-point values.
double global_curvature(const CurvatureField &field);

/// Sample skewness (population moments) of the values; 0 when the values
/// have zero variance. Reported as a diagnostic only.
double curvature_skewness(const CurvatureField &field);

SamplingLadder curvature_sample(const PointCloud &cloud, const CurvatureField &field, std::size_t steps);

/// Rebuilds ladder clouds from the stored indices over a (typically rotated)
/// copy of the source cloud.
SamplingLadder reindex_ladder(const SamplingLadder &ladder, const PointCloud &source);

/// Greedy farthest point sampling starting at `start_index`; ties go to the
/// lower index. Returned indices are in selection order.
std::vector<std::size_t> fps_indices(const PointCloud &cloud, std::size_t m, std::size_t start_index = 0);
PointCloud fps(const PointCloud &cloud, std::size_t m, std::size_t start_index = 0);

} // namespace pcup

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcup/point_cloud.hpp"

namespace pcup {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor &, const Neighbor &) = default;
};

/// Exact k-nearest-neighbour index over an immutable copy of a cloud.
///
/// Balanced k-d tree (median split on the widest axis). Results are ordered
/// by ascending Euclidean distance with ties broken by ascending point index,
/// and are identical to those of an exhaustive scan. Const queries are safe
/// to run concurrently.
class NeighborIndex {
public:
  explicit NeighborIndex(PointCloud cloud);

  std::size_t size() const { return cloud_.size(); }
  const PointCloud &cloud() const { return cloud_; }

  std::vector<Neighbor> knn(const Point3 &query, std::size_t k) const;
  Neighbor nearest(const Point3 &query) const;
  double nearest_distance(const Point3 &query) const { return nearest(query).distance; }

private:
  struct Node {
    // Leaf when axis < 0; then [begin, end) indexes into order_.
    std::int32_t axis = -1;
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  PointCloud cloud_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

inline NeighborIndex build_index(const PointCloud &cloud) { return NeighborIndex(cloud); }

} // namespace pcup

#include "pcup/neighbor_index.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "pcup/error.hpp"

namespace pcup {
namespace {

constexpr std::uint32_t kLeafSize = 12;

// Bounded result set kept sorted by (distance, index).
class KnnCollector {
public:
  explicit KnnCollector(std::size_t k) : k_(k) { best_.reserve(k + 1); }

  double worst() const {
    return best_.size() < k_ ? std::numeric_limits<double>::infinity() : best_.back().distance;
  }

  void offer(std::size_t index, double dist) {
    if (best_.size() == k_) {
      const Neighbor &w = best_.back();
      if (dist > w.distance || (dist == w.distance && index > w.index))
        return;
    }
    Neighbor n{index, dist};
    auto pos = std::upper_bound(best_.begin(), best_.end(), n, [](const Neighbor &a, const Neighbor &b) {
      return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    });
    best_.insert(pos, n);
    if (best_.size() > k_)
      best_.pop_back();
  }

  std::vector<Neighbor> take() { return std::move(best_); }

private:
  std::size_t k_;
  std::vector<Neighbor> best_;
};

} // namespace

NeighborIndex::NeighborIndex(PointCloud cloud) : cloud_(std::move(cloud)) {
  if (cloud_.empty())
    throw Error(ErrorCode::EmptyCloud, "cannot index an empty cloud");
  order_.resize(cloud_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i)
    order_[i] = i;
  nodes_.reserve(2 * (cloud_.size() / kLeafSize + 1));
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::uint32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{-1, 0.0, begin, end, 0, 0});
  if (end - begin <= kLeafSize)
    return id;

  Point3 lo = cloud_[order_[begin]];
  Point3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    const Point3 &p = cloud_[order_[i]];
    for (std::size_t a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a)
    if (hi[a] - lo[a] > hi[axis] - lo[axis])
      axis = a;
  if (hi[axis] - lo[axis] <= 0.0)
    return id; // all coincident, keep as a leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = cloud_[a][axis];
                     const double vb = cloud_[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  const double split = cloud_[order_[mid]][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node &node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

std::vector<Neighbor> NeighborIndex::knn(const Point3 &query, std::size_t k) const {
  if (k == 0 || k > cloud_.size())
    throw Error(ErrorCode::KTooLarge,
                "k=" + std::to_string(k) + " for a cloud of " + std::to_string(cloud_.size()) + " points");
  KnnCollector result(k);

  // Left subtree holds values <= split, right holds values >= split.
  struct Pending {
    std::uint32_t node;
    double plane_gap;
  };
  std::vector<Pending> stack;
  stack.reserve(64);
  stack.push_back({0, 0.0});
  while (!stack.empty()) {
    const Pending cur = stack.back();
    stack.pop_back();
    // The gap only lower-bounds distances; a small relative slack keeps
    // rounding in the distance formula from pruning an exact tie.
    if (cur.plane_gap > result.worst() * (1.0 + 1e-12))
      continue;
    const Node &node = nodes_[cur.node];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        result.offer(idx, distance(query, cloud_[idx]));
      }
      continue;
    }
    const double diff = query[static_cast<std::size_t>(node.axis)] - node.split;
    const double gap = std::max(cur.plane_gap, std::abs(diff));
    if (diff <= 0.0) {
      stack.push_back({node.right, gap});
      stack.push_back({node.left, cur.plane_gap});
    } else {
      stack.push_back({node.left, gap});
      stack.push_back({node.right, cur.plane_gap});
    }
  }
  return result.take();
}

Neighbor NeighborIndex::nearest(const Point3 &query) const { return knn(query, 1).front(); }

} // namespace pcup

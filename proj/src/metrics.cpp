#include "pcup/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <random>

#include "pcup/error.hpp"
#include "pcup/format.hpp"
#include "pcup/neighbor_index.hpp"

namespace pcup {
namespace {

void require_non_empty(const PointCloud &a, const PointCloud &b) {
  if (a.empty() || b.empty())
    throw Error(ErrorCode::EmptyCloud, "metrics need two non-empty clouds");
}

// Directed sum and max of nearest distances from every point of `from`.
std::pair<double, double> directed(const PointCloud &from, const NeighborIndex &to) {
  double sum = 0.0;
  double worst = 0.0;
  for (const auto &p : from) {
    const double d = to.nearest_distance(p);
    sum += d;
    worst = std::max(worst, d);
  }
  return {sum, worst};
}

} // namespace

double chamfer(const PointCloud &a, const PointCloud &b) {
  require_non_empty(a, b);
  const auto [sa, ma] = directed(a, NeighborIndex(b));
  const auto [sb, mb] = directed(b, NeighborIndex(a));
  return 0.5 * (sa / static_cast<double>(a.size()) + sb / static_cast<double>(b.size()));
}

double hausdorff(const PointCloud &a, const PointCloud &b) {
  require_non_empty(a, b);
  const auto [sa, ma] = directed(a, NeighborIndex(b));
  const auto [sb, mb] = directed(b, NeighborIndex(a));
  return std::max(ma, mb);
}

void TriangleMesh::validate() const {
  if (triangles.empty())
    throw Error(ErrorCode::EmptyMesh, "mesh has no triangles");
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (std::size_t v : triangles[t])
      if (v >= vertices.size())
        throw Error(ErrorCode::Malformed, "triangle " + std::to_string(t) + " references vertex " +
                                              std::to_string(v) + " of " + std::to_string(vertices.size()));
    const auto &[i, j, k] = triangles[t];
    const double area = 0.5 * norm(cross(vertices[j] - vertices[i], vertices[k] - vertices[i]));
    if (!(area > 1e-12))
      throw Error(ErrorCode::Malformed, "triangle " + std::to_string(t) + " is degenerate");
  }
}

double point_triangle_distance(const Point3 &p, const Point3 &a, const Point3 &b, const Point3 &c) {
  const Point3 ab = b - a;
  const Point3 ac = c - a;
  const Point3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0)
    return distance(p, a);

  const Point3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3)
    return distance(p, b);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0)
    return distance(p, a + ab * (d1 / (d1 - d3)));

  const Point3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6)
    return distance(p, c);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0)
    return distance(p, a + ac * (d2 / (d2 - d6)));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return distance(p, b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6))));

  // Face region: distance to the supporting plane.
  const Point3 n = cross(ab, ac);
  return std::abs(dot(ap, n)) / norm(n);
}

namespace {

double mesh_p2f(const PointCloud &pred, const TriangleMesh &mesh) {
  mesh.validate();
  struct Bound {
    Point3 center;
    double radius;
  };
  std::vector<Bound> bounds;
  bounds.reserve(mesh.triangles.size());
  for (const auto &[i, j, k] : mesh.triangles) {
    const Point3 c = (mesh.vertices[i] + mesh.vertices[j] + mesh.vertices[k]) / 3.0;
    const double r = std::max({distance(c, mesh.vertices[i]), distance(c, mesh.vertices[j]),
                               distance(c, mesh.vertices[k])});
    bounds.push_back({c, r});
  }
  double sum = 0.0;
  std::vector<std::pair<double, std::size_t>> order(mesh.triangles.size());
  for (const auto &p : pred) {
    // Visit triangles by lower bound so the exact minimum is found early and
    // the remaining ones are skipped once their bound exceeds it.
    for (std::size_t t = 0; t < bounds.size(); ++t)
      order[t] = {std::max(0.0, distance(p, bounds[t].center) - bounds[t].radius), t};
    std::sort(order.begin(), order.end());
    double best = std::numeric_limits<double>::infinity();
    for (const auto &[lower, t] : order) {
      if (lower > best)
        break;
      const auto &[i, j, k] = mesh.triangles[t];
      best = std::min(best, point_triangle_distance(p, mesh.vertices[i], mesh.vertices[j], mesh.vertices[k]));
    }
    sum += best;
  }
  return sum / static_cast<double>(pred.size());
}

} // namespace

double p2f(const PointCloud &pred, const SurfaceRef &surface) {
  if (pred.empty())
    throw Error(ErrorCode::EmptyCloud, "p2f needs a non-empty prediction");
  if (const auto *mesh = std::get_if<TriangleMesh>(&surface))
    return mesh_p2f(pred, *mesh);
  const auto &oracle = std::get<ShapeOracle>(surface);
  double sum = 0.0;
  for (const auto &p : pred)
    sum += analytic_udf(oracle, p).distance;
  return sum / static_cast<double>(pred.size());
}

PointCloud add_noise(const PointCloud &cloud, double tau, std::uint64_t rng_seed) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw Error(ErrorCode::BadArgument, "noise level must be a finite value >= 0");
  if (tau == 0.0)
    return cloud;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> g(0.0, tau);
  PointCloud out = cloud;
  for (auto &p : out.points) {
    p.x += g(rng);
    p.y += g(rng);
    p.z += g(rng);
  }
  return out;
}

MetricReport evaluate(const PointCloud &pred, const PointCloud &gt, const SurfaceRef *surface) {
  MetricReport r;
  r.cd = chamfer(pred, gt);
  r.hd = hausdorff(pred, gt);
  if (surface)
    r.p2f = p2f(pred, *surface);
  return r;
}

std::string format_report_csv(const MetricReport &report) {
  std::string out = "metric,value_raw,value_x1e3\n";
  char scaled[64];
  auto row = [&](const char *name, double v) {
    std::snprintf(scaled, sizeof scaled, "%.3f", v * MetricReport::kDisplayScale);
    out += std::string(name) + "," + shortest(v) + "," + scaled + "\n";
  };
  row("cd", report.cd);
  row("hd", report.hd);
  if (report.p2f)
    row("p2f", *report.p2f);
  return out;
}

} // namespace pcup

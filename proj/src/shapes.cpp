#include "pcup/shapes.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

#include "pcup/curvature.hpp"
#include "pcup/error.hpp"
#include "pcup/neighbor_index.hpp"

namespace pcup {
namespace {

template <class... Ts> struct Overloaded : Ts... {
  using Ts::operator()...;
};

double sign_of(double v) { return v > 0.0 ? 1.0 : -1.0; }

UdfSample local_udf(const Sphere &s, const Point3 &x) {
  const double rho = norm(x);
  UdfSample out;
  out.distance = std::abs(rho - s.radius);
  if (out.distance > 0.0 && rho > 0.0) {
    out.gradient = x * (sign_of(rho - s.radius) / rho);
    out.gradient_defined = true;
  }
  return out;
}

UdfSample local_udf(const Box &b, const Point3 &x) {
  UdfSample out;
  Point3 outside;
  bool is_outside = false;
  for (std::size_t a = 0; a < 3; ++a) {
    outside[a] = std::max(std::abs(x[a]) - b.half_extents[a], 0.0);
    is_outside = is_outside || outside[a] > 0.0;
  }
  if (is_outside) {
    out.distance = norm(outside);
    for (std::size_t a = 0; a < 3; ++a)
      out.gradient[a] = x[a] >= 0.0 ? outside[a] / out.distance : -outside[a] / out.distance;
    out.gradient_defined = true;
    return out;
  }
  std::size_t axis = 0;
  Point3 depth;
  for (std::size_t a = 0; a < 3; ++a) {
    depth[a] = b.half_extents[a] - std::abs(x[a]);
    if (depth[a] < depth[axis])
      axis = a;
  }
  out.distance = depth[axis];
  bool unique = x[axis] != 0.0;
  for (std::size_t a = 0; a < 3; ++a)
    if (a != axis && depth[a] == depth[axis])
      unique = false;
  if (out.distance > 0.0 && unique) {
    out.gradient[axis] = -sign_of(x[axis]);
    out.gradient_defined = true;
  }
  return out;
}

UdfSample local_udf(const Torus &t, const Point3 &x) {
  UdfSample out;
  const double rho = std::hypot(x.x, x.y);
  if (rho == 0.0) {
    out.distance = std::abs(std::hypot(t.major_radius, x.z) - t.minor_radius);
    return out;
  }
  const Point3 ring{t.major_radius * x.x / rho, t.major_radius * x.y / rho, 0.0};
  const Point3 v = x - ring;
  const double dc = norm(v);
  out.distance = std::abs(dc - t.minor_radius);
  if (dc > 0.0 && out.distance > 0.0) {
    out.gradient = v * (sign_of(dc - t.minor_radius) / dc);
    out.gradient_defined = true;
  }
  return out;
}

UdfSample local_udf(const Plane &p, const Point3 &x) {
  UdfSample out;
  const double s = dot(p.normal, x) - p.offset;
  out.distance = std::abs(s);
  if (s != 0.0) {
    out.gradient = p.normal * sign_of(s);
    out.gradient_defined = true;
  }
  return out;
}

Point3 unit_orthogonal(const Point3 &n) {
  const Point3 helper = std::abs(n.x) < 0.9 ? Point3{1, 0, 0} : Point3{0, 1, 0};
  const Point3 u = cross(n, helper);
  return u / norm(u);
}

Point3 sample_local(const ShapeGeometry &g, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  return std::visit(
      Overloaded{
          [&](const Sphere &s) {
            Point3 v;
            double len = 0.0;
            do {
              v = {gauss(rng), gauss(rng), gauss(rng)};
              len = norm(v);
            } while (len < 1e-12);
            return v * (s.radius / len);
          },
          [&](const Box &b) {
            const Point3 &h = b.half_extents;
            const double areas[3] = {h.y * h.z, h.x * h.z, h.x * h.y};
            const double total = areas[0] + areas[1] + areas[2];
            double pick = unit(rng) * total;
            std::size_t axis = 0;
            while (axis < 2 && pick >= areas[axis]) {
              pick -= areas[axis];
              ++axis;
            }
            Point3 p;
            for (std::size_t a = 0; a < 3; ++a)
              p[a] = (2.0 * unit(rng) - 1.0) * h[a];
            p[axis] = unit(rng) < 0.5 ? -h[axis] : h[axis];
            return p;
          },
          [&](const Torus &t) {
            const double two_pi = 2.0 * std::numbers::pi;
            for (;;) {
              const double tube = two_pi * unit(rng);
              const double ring = two_pi * unit(rng);
              const double w = (t.major_radius + t.minor_radius * std::cos(tube)) /
                               (t.major_radius + t.minor_radius);
              if (unit(rng) <= w) {
                const double rr = t.major_radius + t.minor_radius * std::cos(tube);
                return Point3{rr * std::cos(ring), rr * std::sin(ring), t.minor_radius * std::sin(tube)};
              }
            }
          },
          [&](const Plane &p) {
            const Point3 u = unit_orthogonal(p.normal);
            const Point3 v = cross(p.normal, u);
            const double a = (2.0 * unit(rng) - 1.0) * p.extent;
            const double b = (2.0 * unit(rng) - 1.0) * p.extent;
            return p.normal * p.offset + u * a + v * b;
          },
      },
      g);
}

double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw Error(ErrorCode::BadArgument, "bad value '" + std::string(text) + "' for shape parameter '" +
                                            std::string(key) + "'");
  return v;
}

} // namespace

void ShapeOracle::validate() const {
  std::visit(Overloaded{
                 [](const Sphere &s) {
                   if (!(s.radius > 0.0))
                     throw Error(ErrorCode::BadArgument, "sphere radius must be positive");
                 },
                 [](const Box &b) {
                   if (!(b.half_extents.x > 0.0 && b.half_extents.y > 0.0 && b.half_extents.z > 0.0))
                     throw Error(ErrorCode::BadArgument, "box half extents must be positive");
                 },
                 [](const Torus &t) {
                   if (!(t.major_radius > 0.0 && t.minor_radius > 0.0))
                     throw Error(ErrorCode::BadArgument, "torus radii must be positive");
                 },
                 [](const Plane &p) {
                   if (std::abs(norm(p.normal) - 1.0) > 1e-12 || !(p.extent > 0.0))
                     throw Error(ErrorCode::BadArgument, "plane needs a unit normal and positive extent");
                 },
             },
             geometry);
  if (rotation.orthonormality_error() > 1e-12)
    throw Error(ErrorCode::BadArgument, "oracle rotation is not orthonormal");
}

ShapeOracle ShapeOracle::in_frame(const NormalizationTransform &t) const {
  const double s = 1.0 / t.scale;
  ShapeOracle out = *this;
  out.translation = (translation - t.centroid) * s;
  std::visit(Overloaded{
                 [s](Sphere &g) { g.radius *= s; },
                 [s](Box &g) { g.half_extents *= s; },
                 [s](Torus &g) {
                   g.major_radius *= s;
                   g.minor_radius *= s;
                 },
                 [s](Plane &g) {
                   g.offset *= s;
                   g.extent *= s;
                 },
             },
             out.geometry);
  return out;
}

std::string ShapeOracle::kind_name() const {
  return std::visit(Overloaded{
                        [](const Sphere &) { return std::string("sphere"); },
                        [](const Box &) { return std::string("box"); },
                        [](const Torus &) { return std::string("torus"); },
                        [](const Plane &) { return std::string("plane"); },
                    },
                    geometry);
}

ShapeOracle make_sphere(double radius) {
  ShapeOracle o{Sphere{radius}, Rotation::identity(), {}};
  o.validate();
  return o;
}

ShapeOracle make_box(const Point3 &half_extents) {
  ShapeOracle o{Box{half_extents}, Rotation::identity(), {}};
  o.validate();
  return o;
}

ShapeOracle make_torus(double major_radius, double minor_radius) {
  ShapeOracle o{Torus{major_radius, minor_radius}, Rotation::identity(), {}};
  o.validate();
  return o;
}

ShapeOracle make_plane(const Point3 &normal, double offset, double extent) {
  const double len = norm(normal);
  if (!(len > 0.0))
    throw Error(ErrorCode::BadArgument, "plane normal must be non-zero");
  ShapeOracle o{Plane{normal / len, offset, extent}, Rotation::identity(), {}};
  o.validate();
  return o;
}

ShapeOracle parse_oracle_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string kind(spec.substr(0, colon));
  std::map<std::string, double, std::less<>> params;
  if (colon != std::string_view::npos) {
    std::string_view rest = spec.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos)
        throw Error(ErrorCode::BadArgument, "shape parameter '" + std::string(item) + "' needs key=value");
      const std::string key(item.substr(0, eq));
      params[key] = parse_number(key, item.substr(eq + 1));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  auto take = [&](std::string_view key, double fallback) {
    const auto it = params.find(key);
    if (it == params.end())
      return fallback;
    const double v = it->second;
    params.erase(it);
    return v;
  };
  ShapeOracle out;
  if (kind == "sphere") {
    out = make_sphere(take("r", 1.0));
  } else if (kind == "box") {
    const double hx = take("hx", 1.0);
    const double hy = take("hy", 1.0);
    const double hz = take("hz", 1.0);
    out = make_box({hx, hy, hz});
  } else if (kind == "torus") {
    const double big = take("R", 2.0);
    const double small = take("r", 0.5);
    out = make_torus(big, small);
  } else if (kind == "plane") {
    const double nx = take("nx", 0.0);
    const double ny = take("ny", 0.0);
    const double nz = take("nz", 1.0);
    const double off = take("off", 0.0);
    const double extent = take("extent", 1.0);
    out = make_plane({nx, ny, nz}, off, extent);
  } else {
    throw Error(ErrorCode::BadArgument, "unknown shape '" + kind + "' (sphere, box, torus, plane)");
  }
  if (!params.empty())
    throw Error(ErrorCode::BadArgument, "unknown parameter '" + params.begin()->first + "' for " + kind);
  return out;
}

std::string format_oracle_spec(const ShapeOracle &oracle) {
  char buf[256];
  std::visit(Overloaded{
                 [&](const Sphere &s) { std::snprintf(buf, sizeof buf, "sphere:r=%.17g", s.radius); },
                 [&](const Box &b) {
                   std::snprintf(buf, sizeof buf, "box:hx=%.17g,hy=%.17g,hz=%.17g", b.half_extents.x,
                                 b.half_extents.y, b.half_extents.z);
                 },
                 [&](const Torus &t) {
                   std::snprintf(buf, sizeof buf, "torus:R=%.17g,r=%.17g", t.major_radius, t.minor_radius);
                 },
                 [&](const Plane &p) {
                   std::snprintf(buf, sizeof buf, "plane:nx=%.17g,ny=%.17g,nz=%.17g,off=%.17g,extent=%.17g",
                                 p.normal.x, p.normal.y, p.normal.z, p.offset, p.extent);
                 },
             },
             oracle.geometry);
  return buf;
}

UdfSample analytic_udf(const ShapeOracle &oracle, const Point3 &q) {
  const Point3 local = oracle.rotation.apply_inverse(q - oracle.translation);
  UdfSample s = std::visit([&](const auto &g) { return local_udf(g, local); }, oracle.geometry);
  if (s.gradient_defined)
    s.gradient = oracle.rotation.apply(s.gradient);
  return s;
}

PointCloud sample_surface(const ShapeOracle &oracle, std::size_t n, std::uint64_t rng_seed) {
  if (n < 1)
    throw Error(ErrorCode::BadCount, "surface sampling needs n >= 1");
  std::mt19937_64 rng(rng_seed);
  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back(oracle.rotation.apply(sample_local(oracle.geometry, rng)) + oracle.translation);
  return PointCloud(std::move(pts));
}

std::vector<PatchPair> make_patch_dataset(const std::vector<ShapeOracle> &oracles,
                                          std::size_t patches_per_shape, std::size_t sparse_n,
                                          std::size_t rate, std::uint64_t rng_seed, std::size_t pool_factor) {
  if (rate < 2)
    throw Error(ErrorCode::BadArgument, "patch upsampling rate must be >= 2");
  if (sparse_n < 32)
    throw Error(ErrorCode::BadArgument, "patches need at least 32 sparse points");
  if (pool_factor < 1)
    throw Error(ErrorCode::BadArgument, "pool factor must be >= 1");
  const std::size_t dense_n = rate * sparse_n;
  std::mt19937_64 rng(rng_seed);
  std::vector<PatchPair> out;
  out.reserve(oracles.size() * patches_per_shape);
  for (const auto &oracle : oracles) {
    for (std::size_t p = 0; p < patches_per_shape; ++p) {
      const PointCloud pool = sample_surface(oracle, pool_factor * dense_n, rng());
      const NeighborIndex index(pool);
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const auto nbrs = index.knn(pool[pick(rng)], dense_n);
      std::vector<std::size_t> idx;
      idx.reserve(nbrs.size());
      for (const auto &nb : nbrs)
        idx.push_back(nb.index);
      const PointCloud dense = gather(pool, idx);
      const PointCloud sparse = fps(dense, sparse_n, 0);
      PatchPair pair;
      pair.transform = fit_normalization(dense);
      pair.dense = pair.transform.apply(dense);
      pair.sparse = pair.transform.apply(sparse);
      pair.source = oracle;
      out.push_back(std::move(pair));
    }
  }
  return out;
}

} // namespace pcup

#include <random>

#include "doctest.h"
#include "pcup/error.hpp"
#include "pcup/metrics.hpp"
#include "unit/oracles.hpp"

using namespace pcup;

namespace {

TriangleMesh unit_square() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

// Minimum distance over a regular barycentric grid with n subdivisions.
double sampled_triangle_distance(const Point3 &p, const Point3 &a, const Point3 &b, const Point3 &c, int n) {
  double best = 1e300;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) {
      const double u = double(i) / n, v = double(j) / n;
      best = std::min(best, distance(p, a + (b - a) * u + (c - a) * v));
    }
  return best;
}

} // namespace

TEST_CASE("chamfer and hausdorff basics") {
  const PointCloud a({{0, 0, 0}});
  const PointCloud b({{1, 0, 0}});
  CHECK(chamfer(a, b) == 1.0);
  CHECK(chamfer(a, a) == 0.0);
  CHECK(hausdorff(PointCloud({{0, 0, 0}, {3, 0, 0}}), a) == 3.0);
  CHECK(hausdorff(a, a) == 0.0);
  CHECK_THROWS_AS(chamfer(a, PointCloud{}), Error);
  CHECK_THROWS_AS(hausdorff(PointCloud{}, a), Error);
}

TEST_CASE("metrics match brute force and satisfy their properties") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 50; ++t) {
    const auto a = test::random_cloud(rng, 64);
    const auto b = test::random_cloud(rng, 80);
    const double cd = chamfer(a, b);
    const double hd = hausdorff(a, b);
    REQUIRE(std::abs(cd - test::brute_chamfer(a, b)) < 1e-12);
    REQUIRE(std::abs(hd - test::brute_hausdorff(a, b)) < 1e-12);
    REQUIRE(cd == chamfer(b, a));
    REQUIRE(hd == hausdorff(b, a));
    REQUIRE(cd <= hd);
    const auto rot = Rotation::from_uniform(u(rng), u(rng), u(rng));
    const Point3 shift = test::random_point(rng, -3, 3);
    auto move = [&](const PointCloud &c) {
      PointCloud out = rotate(c, rot);
      for (auto &p : out.points)
        p += shift;
      return out;
    };
    REQUIRE(std::abs(chamfer(move(a), move(b)) - cd) < 1e-9);
    REQUIRE(std::abs(hausdorff(move(a), move(b)) - hd) < 1e-9);
  }
  // same set, different order and multiplicity
  const auto a = test::random_cloud(rng, 30);
  PointCloud b = a;
  std::shuffle(b.points.begin(), b.points.end(), rng);
  CHECK(chamfer(a, b) == 0.0);
  b.points.push_back(b[0]);
  CHECK(hausdorff(a, b) == 0.0);
}

TEST_CASE("point to triangle distance") {
  const auto sq = unit_square();
  CHECK(p2f(PointCloud({{0.25, 0.5, 1.0}}), sq) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p2f(PointCloud({{0.25, 0.5, 0.0}, {1, 1, 0}, {0.5, 0.5, 0}}), sq) < 1e-9);
  CHECK(p2f(PointCloud({{2, 0.5, 0}}), sq) == doctest::Approx(1.0));
  CHECK(p2f(PointCloud({{2, 2, 0}}), sq) == doctest::Approx(std::sqrt(2.0)));

  std::mt19937_64 rng(2);
  for (int t = 0; t < 2000; ++t) {
    const Point3 a = test::random_point(rng), b = test::random_point(rng), c = test::random_point(rng);
    if (norm(cross(b - a, c - a)) < 1e-3)
      continue;
    const Point3 p = test::random_point(rng, -2, 2);
    REQUIRE(std::abs(point_triangle_distance(p, a, b, c) - test::brute_point_triangle(p, a, b, c)) < 1e-9);
  }
  // dense barycentric sampling: ~10^6 samples per triangle
  for (int t = 0; t < 3; ++t) {
    const Point3 a = test::random_point(rng), b = test::random_point(rng), c = test::random_point(rng);
    const Point3 dir = cross(b - a, c - a);
    // keep the query away from the triangle so sampling error stays second order
    const Point3 p = (a + b + c) / 3.0 + dir / norm(dir) * 1.5 + test::random_point(rng, -0.5, 0.5);
    const double exact = point_triangle_distance(p, a, b, c);
    CHECK(std::abs(exact - sampled_triangle_distance(p, a, b, c, 1413)) < 1e-6);
  }
}

TEST_CASE("mesh validation and oracle p2f") {
  TriangleMesh empty;
  try {
    p2f(PointCloud({{0, 0, 0}}), empty);
    FAIL("expected EmptyMesh");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::EmptyMesh);
  }
  TriangleMesh bad = unit_square();
  bad.triangles.push_back({0, 1, 7});
  CHECK_THROWS_AS(bad.validate(), Error);
  TriangleMesh flat = unit_square();
  flat.vertices.push_back({2, 0, 0});
  flat.triangles.push_back({0, 1, 4});
  CHECK_THROWS_AS(flat.validate(), Error);

  const auto sphere = make_sphere(1.0);
  CHECK(p2f(PointCloud({{2, 0, 0}, {0, 0.5, 0}}), sphere) == doctest::Approx(0.75));
  CHECK(p2f(sample_surface(sphere, 100, 1), sphere) < 1e-9);
}

TEST_CASE("gaussian noise") {
  std::mt19937_64 rng(3);
  const auto cloud = test::random_cloud(rng, 100000);
  CHECK(add_noise(cloud, 0.0, 1) == cloud);
  const auto noisy = add_noise(cloud, 0.01, 5);
  CHECK(add_noise(cloud, 0.01, 5) == noisy);
  for (std::size_t a = 0; a < 3; ++a) {
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const double d = noisy[i][a] - cloud[i][a];
      s += d;
      s2 += d * d;
    }
    const double n = static_cast<double>(cloud.size());
    const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
    CHECK(std::abs(sd - 0.01) < 0.05 * 0.01);
  }
  CHECK_THROWS_AS(add_noise(cloud, -1.0, 1), Error);
}

TEST_CASE("report formatting applies the display scale only") {
  MetricReport r;
  r.cd = 0.000229;
  r.hd = 0.0;
  r.p2f = 0.001908;
  CHECK(format_report_csv(r) ==
        "metric,value_raw,value_x1e3\ncd,0.000229,0.229\nhd,0,0.000\np2f,0.001908,1.908\n");
  CHECK(r.cd == 0.000229);
}

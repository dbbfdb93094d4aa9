// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only N]... [--work DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "pcup/curvature.hpp"
#include "pcup/error.hpp"
#include "pcup/harness.hpp"
#include "pcup/io.hpp"
#include "pcup/metrics.hpp"
#include "pcup/neighbor_index.hpp"
#include "pcup/plse.hpp"
#include "pcup/shapes.hpp"
#include "pcup/training.hpp"
#include "pcup/upsampler.hpp"
#include "unit/oracles.hpp"

using namespace pcup;
namespace fs = std::filesystem;

namespace {

fs::path g_work;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char *f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char *f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

int cli(std::vector<std::string> args, std::string *stdout_text = nullptr) {
  args.insert(args.begin(), "pcup");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (stdout_text)
    *stdout_text = out.str();
  if (rc != 0)
    std::fprintf(stderr, "  pcup %s -> %d: %s", args[1].c_str(), rc, err.str().c_str());
  return rc;
}

std::vector<std::size_t> sorted_prefix(const std::vector<double> &c, std::size_t m) {
  std::vector<std::size_t> idx(c.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return c[a] > c[b] || (c[a] == c[b] && a < b);
  });
  idx.resize(m);
  return idx;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

Outcome curvature_correctness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();

  const auto sphere = test::fibonacci_sphere(4096);
  const auto field = compute_curvature(sphere, 16, 16);
  const auto chord = test::sphere_chord_curvature(sphere, 16, 1.0);
  const double mean_c = std::accumulate(field.values.begin(), field.values.end(), 0.0) / 4096.0;
  const double mean_chord = std::accumulate(chord.begin(), chord.end(), 0.0) / 4096.0;
  const double rel = std::abs(mean_c - mean_chord) / mean_chord;
  o.require(rel < 0.05, fmt("sphere mean %.5f vs chord %.5f", mean_c, mean_chord));

  std::mt19937_64 rng(1);
  const auto plane = test::plane_patch(rng, 1000);
  const auto pf = compute_curvature(plane, 16, 16);
  const double plane_max = *std::max_element(pf.values.begin(), pf.values.end());
  o.require(plane_max < 1e-3, fmt("plane max %.3g", plane_max));

  for (int t = 0; t < 1000 && o.pass; ++t) {
    const std::size_t k = 4 + rng() % 13;
    const auto cloud = test::random_cloud(rng, k + 1 + rng() % 100, -2.0, 2.0);
    for (double c : compute_curvature(cloud, k, std::max<std::size_t>(3, k - 2)).values)
      o.require(c >= 0.0 && c <= 1.0, fmt("random cloud %g has c = %.17g", t, c));
  }

  const double dt = seconds_since(t0);
  o.require(dt < 10.0, fmt("took %.1f s", dt));
  if (o.pass)
    o.detail = fmt("sphere rel err %.4f, plane max %.2g", rel, plane_max);
  return o;
}

Outcome sampling_correctness() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> tie(0, 5);
  for (int t = 0; t < 200 && o.pass; ++t) {
    const std::size_t n = 16 + rng() % 400;
    const auto cloud = test::random_cloud(rng, n);
    CurvatureField f;
    if (t % 2 == 0) {
      f = compute_curvature(cloud, 8, 8);
    } else {
      f.k = 8;
      for (std::size_t i = 0; i < n; ++i)
        f.values.push_back(tie(rng) / 5.0);
    }
    const std::size_t steps = 1 + rng() % 4;
    const auto ladder = curvature_sample(cloud, f, steps);
    o.require(ladder.levels() == steps + 1, "level count");
    for (std::size_t s = 1; s <= steps && o.pass; ++s) {
      o.require(ladder.clouds[s].size() == (n >> s), "ladder size");
      o.require(ladder.indices[s] == sorted_prefix(f.values, n >> s), fmt("cloud %g level %g", t, double(s)));
      o.require(ladder.clouds[s] == gather(cloud, ladder.indices[s]), "ladder points");
    }
  }
  for (int t = 0; t < 200 && o.pass; ++t) {
    const auto cloud = test::random_cloud(rng, 2 + rng() % 127);
    const std::size_t m = 1 + rng() % cloud.size();
    const std::size_t start = rng() % cloud.size();
    o.require(fps_indices(cloud, m, start) == test::brute_fps(cloud, m, start), fmt("fps instance %g", t));
  }
  const auto c256 = test::random_cloud(rng, 256);
  const auto l256 = curvature_sample(c256, compute_curvature(c256), 4);
  std::vector<std::size_t> sizes;
  for (std::size_t s = 1; s < l256.levels(); ++s)
    sizes.push_back(l256.clouds[s].size());
  o.require(sizes == std::vector<std::size_t>{128, 64, 32, 16}, "k=256, steps=4 sizes");
  if (o.pass)
    o.detail = "200 ladders, 200 fps runs, [128,64,32,16]";
  return o;
}

Outcome metric_exactness() {
  Outcome o;
  std::mt19937_64 rng(3);
  double worst = 0.0;
  auto close = [&](double a, double b, const char *what) {
    worst = std::max(worst, std::abs(a - b));
    o.require(std::abs(a - b) < 1e-9, fmt(what, a, b));
  };
  for (int t = 0; t < 200 && o.pass; ++t) {
    const auto cloud = test::random_cloud(rng, 1 + rng() % 300);
    const NeighborIndex index(cloud);
    const Point3 q = test::random_point(rng, -1.5, 1.5);
    const std::size_t k = 1 + rng() % std::min<std::size_t>(cloud.size(), 20);
    const auto got = index.knn(q, k);
    const auto want = test::brute_knn(cloud, q, k);
    for (std::size_t i = 0; i < k; ++i) {
      o.require(got[i].index == want[i].index, "knn index");
      close(got[i].distance, want[i].distance, "knn distance %.17g vs %.17g");
    }
    close(index.nearest(q).distance, test::brute_nearest(cloud, q), "nearest %.17g vs %.17g");

    const auto other = test::random_cloud(rng, 1 + rng() % 300);
    close(chamfer(cloud, other), test::brute_chamfer(cloud, other), "chamfer %.17g vs %.17g");
    close(hausdorff(cloud, other), test::brute_hausdorff(cloud, other), "hausdorff %.17g vs %.17g");

    TriangleMesh mesh;
    mesh.vertices = test::random_cloud(rng, 4 + rng() % 20).points;
    const std::size_t tri_count = 1 + rng() % 30;
    while (mesh.triangles.size() < tri_count) {
      const std::size_t a = rng() % mesh.vertices.size(), b = rng() % mesh.vertices.size(),
                        c = rng() % mesh.vertices.size();
      const auto &A = mesh.vertices[a], &B = mesh.vertices[b], &C = mesh.vertices[c];
      if (norm(cross(B - A, C - A)) > 1e-3)
        mesh.triangles.push_back({a, b, c});
    }
    double sum = 0.0;
    for (const auto &p : other.points) {
      double best = INFINITY;
      for (const auto &tri : mesh.triangles)
        best = std::min(best, test::brute_point_triangle(p, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                                         mesh.vertices[tri[2]]));
      sum += best;
    }
    close(p2f(other, SurfaceRef{mesh}), sum / static_cast<double>(other.size()), "p2f %.17g vs %.17g");
  }
  if (o.pass)
    o.detail = fmt("200 instances, worst abs diff %.2g", worst);
  return o;
}

Outcome gradient_correctness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4);
  const double h = 1e-5;
  const double sharpness[] = {1.0, 4.0, 20.0};
  double worst_q = 0.0, worst_p = 0.0;
  for (int t = 0; t < 100 && o.pass; ++t) {
    auto model = init_model(8 + rng() % 25, rng() % 5, 8 + rng() % 57, rng());
    model.sharpness = sharpness[t % 3];
    const auto cloud = test::random_cloud(rng, 64);
    const auto ladder = curvature_sample(cloud, compute_curvature(cloud, 8, 8), model.sampling_steps);
    const Point3 q = test::random_point(rng, -1.5, 1.5);

    const Point3 g = plse_grad_query(model, q, ladder);
    Point3 fd;
    for (std::size_t a = 0; a < 3; ++a) {
      Point3 qp = q, qm = q;
      qp[a] += h;
      qm[a] -= h;
      fd[a] = (plse_forward(model, qp, ladder) - plse_forward(model, qm, ladder)) / (2 * h);
    }
    const double eq = norm(g - fd) / std::max(norm(fd), 1e-4);
    worst_q = std::max(worst_q, eq);
    o.require(eq < 1e-6, fmt("query gradient draw %g rel err %.3g", t, eq));

    const auto analytic = backprop_params(model, q, ladder, 1.0).flatten();
    const auto flat = flatten_parameters(model);
    const std::size_t enc = model.encoder.parameter_count();
    for (int k = 0; k < 24 && o.pass; ++k) {
      const std::size_t i = k % 2 ? rng() % enc : enc + rng() % (flat.size() - enc);
      PlseModel mp = model, mm = model;
      auto fp = flat, fm = flat;
      fp[i] += h;
      fm[i] -= h;
      assign_parameters(mp, fp);
      assign_parameters(mm, fm);
      const double d = (plse_forward(mp, q, ladder) - plse_forward(mm, q, ladder)) / (2 * h);
      const double ep = std::abs(analytic[i] - d) / std::max({std::abs(analytic[i]), std::abs(d), 1e-4});
      worst_p = std::max(worst_p, ep);
      o.require(ep < 1e-5, fmt("parameter gradient draw %g rel err %.3g", t, ep));
    }
  }
  const double dt = seconds_since(t0);
  o.require(dt < 30.0, fmt("took %.1f s", dt));
  if (o.pass)
    o.detail = fmt("worst query %.2g, worst parameter %.2g", worst_q, worst_p);
  return o;
}

Outcome projection_convergence() {
  Outcome o;
  const OracleField sphere(make_sphere(1.0));
  const PointCloud one({{2, 0, 0}});
  const Point3 landed = project(sphere, one, {0.5, 2, 0.0})[0];
  o.require(distance(landed, {1, 0, 0}) < 1e-12, fmt("(2,0,0) landed %.3g away", distance(landed, {1, 0, 0})));

  double worst = 1.0;
  for (const auto &oracle : {make_sphere(1.0), make_torus(1.0, 0.3)}) {
    const OracleField field(oracle);
    const ProjectionParams params{0.02, 10, 0.02};
    const PointCloud sparse = sample_surface(oracle, 2500, 5);
    std::mt19937_64 rng(6);
    const PointCloud seeds = seed_queries(sparse, 4.0, params.seed_sigma, rng);
    o.require(seeds.size() == 10000, "seed count");
    const PointCloud out = project(field, seeds, params);
    std::size_t ok = 0;
    for (const auto &p : out.points)
      ok += analytic_udf(oracle, p).distance < params.step_size;
    const double frac = ok / static_cast<double>(out.size());
    worst = std::min(worst, frac);
    o.require(frac >= 0.99, oracle.kind_name() + fmt(" converged fraction %.4f", frac));
  }
  if (o.pass)
    o.detail = fmt("(2,0,0) -> (1,0,0); worst converged fraction %.4f", worst);
  return o;
}

// Desk-scale learning setup shared with the noise harness.
constexpr std::size_t kLearnSteps = 12000;
constexpr std::size_t kLearnBatch = 4;
constexpr double kLearnSharpness = 20.0;
constexpr double kLearnSeedSigma = 0.08;
constexpr std::size_t kHeldOut = 3;

struct Learned {
  Checkpoint checkpoint;
  std::vector<PatchPair> heldout;
  double train_seconds = 0.0;
};

std::optional<Learned> g_learned;

const Learned &learned_model(bool allow_cache) {
  if (g_learned)
    return *g_learned;
  std::vector<PatchPair> data;
  auto add = [&](const ShapeOracle &s, std::size_t n, std::uint64_t seed) {
    const auto d = make_patch_dataset({s}, n, 256, 4, seed);
    data.insert(data.end(), d.begin(), d.end());
  };
  add(make_sphere(1.0), 22, 11);
  add(make_torus(1.0, 0.35), 21, 12);
  add(make_box({0.8, 0.6, 0.5}), 21, 13);

  TrainConfig c;
  c.feature_dim = 32;
  c.sampling_steps = 4;
  c.hidden = 64;
  c.learning_rate = 1e-3;
  c.batch_size = kLearnBatch;
  c.sharpness = kLearnSharpness;
  c.rotate = false;
  c.max_steps = kLearnSteps;
  c.seed = 1;
  c.seed_sigma = kLearnSeedSigma;
  const std::size_t steps_per_epoch = (data.size() + c.batch_size - 1) / c.batch_size;
  c.epochs = (kLearnSteps + steps_per_epoch - 1) / steps_per_epoch;

  Learned l;
  l.heldout = make_patch_dataset({make_sphere(1.0)}, kHeldOut, 256, 4, 999);
  // The noise criterion may reuse the model criterion 6 just trained.
  const fs::path cached = g_work / "desk_model.json";
  if (allow_cache && fs::exists(cached)) {
    try {
      Checkpoint ck = load_checkpoint(cached);
      if (ck.config == c) {
        l.checkpoint = std::move(ck);
        g_learned = std::move(l);
        return *g_learned;
      }
    } catch (const Error &) {
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  l.checkpoint = train(data, c).checkpoint;
  l.train_seconds = seconds_since(t0);
  save_checkpoint(l.checkpoint, cached);
  g_learned = std::move(l);
  return *g_learned;
}

Outcome desk_scale_learning() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Learned &l = learned_model(false);
  const auto &model = l.checkpoint.model;
  const ProjectionParams params{l.checkpoint.config.step_size, l.checkpoint.config.iterations, kLearnSeedSigma};

  double udf = 0.0, ratio = 0.0;
  for (std::size_t i = 0; i < l.heldout.size(); ++i) {
    const auto s = score_patch(model, l.heldout[i], 4.0, params, l.checkpoint.config.query_sigma, 7 + i);
    udf += s.udf_error / l.heldout.size();
    ratio += s.upsampled.cd / s.baseline.cd / l.heldout.size();
  }
  const double dt = seconds_since(t0);
  o.require(l.checkpoint.steps <= 20000, "step budget");
  o.require(udf < 0.05, fmt("held-out UDF error %.4f", udf));
  o.require(ratio <= 0.70, fmt("held-out UDF error %.4f, CD at %.3f of the T=0 baseline", udf, ratio));
  o.require(dt < 1200.0, fmt("took %.0f s", dt));
  if (o.pass)
    o.detail = fmt("UDF error %.4f, CD at %.3f of baseline", udf, ratio);
  if (l.train_seconds > 0.0)
    o.detail += fmt(" (%.0f training steps in %.0f s)", double(l.checkpoint.steps), l.train_seconds);
  else
    o.detail += " (cached model)";
  return o;
}

Outcome curriculum_mechanics() {
  Outcome o;
  std::vector<Difficulty> labels;
  for (double gcv : {0.1, 0.7, 0.5, 0.49, 0.2, 0.9})
    labels.push_back(classify_difficulty(gcv, 0.5));
  std::mt19937_64 rng(7);
  const auto plan = curriculum_schedule(labels, 100, rng);
  o.require(plan.size() == 100, "epoch count");
  for (std::size_t e = 0; e < plan.size() && o.pass; ++e) {
    const Phase want = e < 50 ? Phase::Easy : Phase::Hard;
    o.require(plan[e].phase == want, fmt("epoch %g phase", double(e + 1)));
    for (std::size_t s : plan[e].samples)
      o.require(labels[s] == (want == Phase::Easy ? Difficulty::Easy : Difficulty::Hard), "sample bucket");
  }

  // Plane patches are easy; box corners carry more curvature than sphere
  // patches sampled at the same density.
  const auto planes = make_patch_dataset({make_plane({0, 0, 1}, 0.0, 1.0), make_plane({1, 2, 3}, 0.2, 1.0)}, 4,
                                         256, 4, 8);
  TrainConfig c;
  for (const auto &p : planes) {
    const auto a = make_train_sample(p, c);
    const auto b = make_train_sample(p, c);
    o.require(a.global_curvature == b.global_curvature && a.difficulty == b.difficulty, "non-deterministic label");
    o.require(a.difficulty == Difficulty::Easy, fmt("plane patch gcv %.3f", a.global_curvature));
  }

  const double density = 4000.0; // points per unit area
  const ShapeOracle box = make_box({1, 1, 1});
  const ShapeOracle sphere = make_sphere(1.0);
  const auto box_pts = sample_surface(box, static_cast<std::size_t>(24.0 * density), 9);
  const auto sph_pts = sample_surface(sphere, static_cast<std::size_t>(4.0 * std::acos(-1.0) * density), 10);
  const NeighborIndex box_index(box_pts), sph_index(sph_pts);
  double box_min = 1.0, sph_max = 0.0;
  std::mt19937_64 pick(11);
  for (int t = 0; t < 8; ++t) {
    Point3 corner{(pick() % 2) ? 1.0 : -1.0, (pick() % 2) ? 1.0 : -1.0, (pick() % 2) ? 1.0 : -1.0};
    PointCloud bp, sp;
    for (const auto &n : box_index.knn(corner, 256))
      bp.points.push_back(box_pts[n.index]);
    const Point3 dir = test::random_point(pick, -1, 1);
    for (const auto &n : sph_index.knn(dir * (1.0 / norm(dir)), 256))
      sp.points.push_back(sph_pts[n.index]);
    box_min = std::min(box_min, global_curvature(compute_curvature(bp)));
    sph_max = std::max(sph_max, global_curvature(compute_curvature(sp)));
  }
  o.require(box_min > sph_max, fmt("box corner gcv %.4f vs sphere %.4f", box_min, sph_max));
  if (o.pass)
    o.detail = fmt("50 Easy + 50 Hard; box corner gcv >= %.3f > sphere <= %.3f", box_min, sph_max);
  return o;
}

Outcome ablation_harness() {
  Outcome o;
  const fs::path dir = g_work / "ablation";
  fs::create_directories(dir);
  write_text_file(dir / "run.cfg", "epochs = 4\nbatch_size = 4\nqueries_per_patch = 32\nfeature_dim = 16\n"
                                   "hidden = 32\nsharpness = 20\npatches_per_shape = 2\nsparse_n = 64\n"
                                   "eval_patches = 1\n");
  const std::string csv_path = (dir / "ablation.csv").string();
  o.require(cli({"ablate-steps", "--config", (dir / "run.cfg").string(), "--steps", "0..5", "--seed", "3", "--out",
                 csv_path}) == 0,
            "ablate-steps failed");
  if (!o.pass)
    return o;
  std::istringstream in(read_text_file(csv_path));
  std::string line;
  std::getline(in, line);
  o.require(line == "sampling_steps,train_steps,final_loss,udf_error,cd,hd,p2f,cd_x1e3,hd_x1e3,p2f_x1e3",
            "header: " + line);
  std::size_t rows = 0;
  while (std::getline(in, line) && o.pass) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      cells.push_back(cell);
    o.require(cells.size() == 10, "row width: " + line);
    o.require(!cells.empty() && cells[0] == std::to_string(rows), "row order: " + line);
    for (const auto &cell : cells) {
      char *end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      o.require(end != cell.c_str() && *end == '\0' && std::isfinite(v), "bad cell: " + line);
    }
    ++rows;
  }
  o.require(rows == 6, fmt("%g rows", double(rows)));
  if (o.pass)
    o.detail = "steps 0..5, 6 rows";
  return o;
}

Outcome noise_harness() {
  Outcome o;
  const Learned &l = learned_model(true);
  const ProjectionParams params{l.checkpoint.config.step_size, l.checkpoint.config.iterations, kLearnSeedSigma};
  const std::vector<double> taus{0.01, 0.02};
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto rows = noise_sweep(l.checkpoint.model, l.heldout[0], taus, seeds, 4.0, params);
  o.require(rows.size() == 10, "row count");
  std::vector<double> med;
  for (double tau : taus) {
    std::vector<double> cds;
    for (const auto &r : rows)
      if (r.tau == tau) {
        o.require(std::isfinite(r.report.cd) && std::isfinite(r.report.hd), "non-finite metric");
        cds.push_back(r.report.cd);
      }
    o.require(cds.size() == 5, "rows per level");
    med.push_back(median(cds));
  }
  write_text_file(g_work / "noise.csv", format_noise_csv(rows));
  o.require(med[0] <= med[1], fmt("median CD %.5f at 0.01, %.5f at 0.02", med[0], med[1]));
  if (o.pass)
    o.detail = fmt("median CD %.5f -> %.5f", med[0], med[1]);
  return o;
}

// Every output file of a fixed pipeline, run in `dir`.
void run_pipeline(const fs::path &dir, Outcome &o) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const char *name) { return (dir / name).string(); };
  write_text_file(dir / "run.cfg", "epochs = 2\nbatch_size = 2\nqueries_per_patch = 16\nfeature_dim = 8\n"
                                   "hidden = 16\nsampling_steps = 2\nsharpness = 20\npatches_per_shape = 1\n"
                                   "sparse_n = 64\neval_patches = 1\n");
  const std::vector<std::vector<std::string>> cmds = {
      {"synth", "--shape", "torus", "--params", "R=1,r=0.35", "--points", "2048", "--seed", "1", "--out", p("t.xyz")},
      {"synth", "--shape", "box", "--points", "512", "--seed", "2", "--out", p("b.ply")},
      {"curvature", "--in", p("t.xyz"), "--out", p("t_curv.csv")},
      {"sample", "--in", p("t.xyz"), "--steps", "3", "--out-prefix", p("t_ladder")},
      {"sample", "--in", p("b.ply"), "--method", "fps", "--count", "100", "--out-prefix", p("b_fps"), "--format",
       "ply"},
      {"make-patches", "--shape", "sphere:r=1", "--shape", "torus:R=1,r=0.35", "--per-shape", "2", "--sparse-n", "64",
       "--seed", "3", "--out-dir", p("data")},
      {"split", "--glob", (dir / "data" / "patch_*.xyz").string(), "--out", p("data/manifest.csv")},
      {"train", "--config", p("run.cfg"), "--data", p("data/manifest.csv"), "--seed", "4", "--out", p("model.json")},
      {"upsample", "--ckpt", p("model.json"), "--in", p("data/patch_000.xyz"), "--rate", "4", "--seed", "5", "--out",
       p("up.xyz")},
      {"upsample", "--oracle", "torus:R=1,r=0.35", "--in", p("t_ladder_level2.xyz"), "--rate", "2.5", "--seed", "6",
       "--out", p("up_oracle.xyz")},
      {"noise", "--in", p("t.xyz"), "--tau", "0.01", "--seed", "7", "--out", p("t_noisy.xyz")},
      {"eval", "--pred", p("up_oracle.xyz"), "--gt", p("t.xyz"), "--oracle", "torus:R=1,r=0.35", "--out",
       p("eval.csv")},
      {"ablate-steps", "--config", p("run.cfg"), "--steps", "0,2", "--seed", "8", "--out", p("ablate.csv")},
  };
  for (const auto &c : cmds)
    o.require(cli(c) == 0, "pcup " + c[0] + " failed");
}

Outcome determinism() {
  Outcome o;
  const fs::path a = g_work / "det_a", b = g_work / "det_b";
  run_pipeline(a, o);
  run_pipeline(b, o);
  std::size_t files = 0;
  for (const auto &entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file())
      continue;
    const auto rel = fs::relative(entry.path(), a);
    o.require(fs::exists(b / rel), rel.string() + " missing in the second run");
    if (o.pass)
      o.require(read_text_file(entry.path()) == read_text_file(b / rel), rel.string() + " differs between runs");
    ++files;
  }

  const Checkpoint loaded = load_checkpoint(a / "model.json");
  save_checkpoint(loaded, a / "model_again.json");
  o.require(read_text_file(a / "model.json") == read_text_file(a / "model_again.json"), "checkpoint re-save differs");

  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 2;
  c.queries_per_patch = 16;
  c.feature_dim = 8;
  c.hidden = 16;
  c.sampling_steps = 2;
  c.sharpness = 20.0;
  c.seed = 9;
  const auto data = make_patch_dataset({make_sphere(1.0)}, 2, 64, 4, 10);
  const Checkpoint trained = train(data, c).checkpoint;
  save_checkpoint(trained, g_work / "rt.json");
  const Checkpoint back = load_checkpoint(g_work / "rt.json");
  o.require(back.model == trained.model && back.config == trained.config && back.steps == trained.steps,
            "checkpoint did not round-trip");
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100 && o.pass; ++t) {
    const Point3 q = test::random_point(rng);
    const auto &ladder = make_train_sample(data[0], c).ladder;
    o.require(plse_forward(trained.model, q, ladder) == plse_forward(back.model, q, ladder), "forward differs");
  }
  if (o.pass)
    o.detail = fmt("%g output files identical; checkpoint bit-exact", double(files));
  return o;
}

} // namespace

int main(int argc, char **argv) {
  std::vector<int> only;
  g_work = fs::temp_directory_path() / "pcup_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc)
      only.push_back(std::atoi(argv[++i]));
    else if (a == "--work" && i + 1 < argc)
      g_work = argv[++i];
    else {
      std::fprintf(stderr, "usage: acceptance [--only N]... [--work DIR]\n");
      return 2;
    }
  }
  fs::create_directories(g_work);

  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"curvature correctness", curvature_correctness},
      {"sampling correctness", sampling_correctness},
      {"k-NN and metric exactness", metric_exactness},
      {"gradient correctness", gradient_correctness},
      {"projection convergence", projection_convergence},
      {"desk-scale learning", desk_scale_learning},
      {"curriculum mechanics", curriculum_mechanics},
      {"ablation harness", ablation_harness},
      {"noise harness", noise_harness},
      {"determinism", determinism},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %2d %-26s %s  %s [%.1f s]\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

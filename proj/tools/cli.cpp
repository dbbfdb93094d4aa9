#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <optional>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "pcup/config.hpp"
#include "pcup/error.hpp"
#include "pcup/format.hpp"
#include "pcup/harness.hpp"
#include "pcup/io.hpp"

namespace fs = std::filesystem;

namespace pcup::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// `0..5` or `0,2,4`.
std::vector<std::size_t> parse_step_list(const std::string &text) {
  std::vector<std::size_t> out;
  auto num = [&](std::string_view s) {
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
      throw UsageError("--steps: '" + std::string(s) + "' is not a non-negative integer");
    return v;
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::size_t a = num(std::string_view(text).substr(0, dots));
    const std::size_t b = num(std::string_view(text).substr(dots + 2));
    if (b < a)
      throw UsageError("--steps: empty range " + text);
    for (std::size_t s = a; s <= b; ++s)
      out.push_back(s);
    return out;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    out.push_back(num(tok));
  if (out.empty())
    throw UsageError("--steps: no values");
  return out;
}

// Directory part literal, file name with `*` and `?` wildcards; sorted.
std::vector<fs::path> expand_glob(const std::string &pattern) {
  const fs::path p(pattern);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  std::string rx;
  for (char c : p.filename().string()) {
    if (c == '*')
      rx += ".*";
    else if (c == '?')
      rx += '.';
    else if (std::isalnum(static_cast<unsigned char>(c)))
      rx += c;
    else
      rx += std::string("\\") + c;
  }
  const std::regex re(rx);
  std::vector<fs::path> out;
  if (!fs::is_directory(dir))
    throw Error(ErrorCode::Io, "no such directory: " + dir.string());
  for (const auto &entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), re))
      out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

bool is_dense_companion(const fs::path &p) {
  const std::string stem = p.stem().string();
  return stem.size() > 6 && stem.compare(stem.size() - 6, 6, "_dense") == 0;
}

fs::path dense_companion(const fs::path &sparse) {
  return sparse.parent_path() / (sparse.stem().string() + "_dense" + sparse.extension().string());
}

struct ManifestRow {
  fs::path sparse;
  fs::path dense;
  double gcv = 0.0;
  double skewness = 0.0;
  Difficulty difficulty = Difficulty::Easy;
};

std::vector<ManifestRow> read_manifest(const fs::path &path) {
  const std::string text = read_text_file(path);
  std::stringstream ss(text);
  std::string line;
  std::vector<ManifestRow> rows;
  std::size_t n = 0;
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string &s) { return fs::path(s).is_absolute() ? fs::path(s) : base / s; };
  while (std::getline(ss, line)) {
    ++n;
    if (n == 1) {
      if (line != "sparse,dense,gcv,skewness,difficulty")
        throw Error(ErrorCode::Malformed, path.string() + ": line 1: unexpected manifest header");
      continue;
    }
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ','))
      f.push_back(tok);
    if (f.size() != 5)
      throw Error(ErrorCode::Malformed, path.string() + ": line " + std::to_string(n) + ": expected 5 fields");
    ManifestRow r;
    r.sparse = resolve(f[0]);
    if (f[1].empty())
      throw Error(ErrorCode::Malformed,
                  path.string() + ": line " + std::to_string(n) + ": training needs a dense file for every patch");
    r.dense = resolve(f[1]);
    try {
      r.gcv = std::stod(f[2]);
      r.skewness = std::stod(f[3]);
      r.difficulty = difficulty_from_string(f[4]);
    } catch (const std::exception &) {
      throw Error(ErrorCode::Malformed, path.string() + ": line " + std::to_string(n) + ": bad value");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string relative_to(const fs::path &p, const fs::path &base) {
  const fs::path rel = fs::proximate(p, base.empty() ? fs::path(".") : base);
  return rel.generic_string();
}

ProjectionParams projection_from(const TrainConfig &c) { return {c.step_size, c.iterations, c.seed_sigma}; }

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Projection-based point cloud upsampling toolkit", "pcup"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // synth
  std::string synth_shape, synth_params, synth_out;
  std::size_t synth_points = 0;
  std::uint64_t synth_seed = 0;
  auto *synth = app.add_subcommand("synth", "Sample points uniformly by area from an analytic shape");
  synth->add_option("--shape", synth_shape, "sphere, box, torus or plane")
      ->required()
      ->check(CLI::IsMember({"sphere", "box", "torus", "plane"}));
  synth->add_option("--points", synth_points, "Number of points")->required()->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "RNG seed")->required();
  synth->add_option("--out", synth_out, "Output .xyz or .ply")->required();
  synth->add_option("--params", synth_params, "Shape parameters, e.g. r=1 or R=2,r=0.5 or hx=1,hy=1,hz=1");

  // curvature
  std::string curv_in, curv_out;
  std::size_t curv_k = kDefaultCurvatureK, curv_nk = kDefaultNormalsK;
  auto *curv = app.add_subcommand("curvature", "Per-point umbrella curvature and the global value");
  curv->add_option("--in", curv_in, "Input cloud")->required();
  curv->add_option("--k", curv_k, "Curvature neighbourhood size")->capture_default_str();
  curv->add_option("--normals-k", curv_nk, "Normal estimation neighbourhood size")->capture_default_str();
  curv->add_option("--out", curv_out, "CSV `index,c`")->required();

  // sample
  std::string sample_in, sample_method = "curvature", sample_prefix, sample_ext = "xyz";
  std::size_t sample_steps = kDefaultSamplingSteps, sample_count = 0, sample_start = 0;
  std::size_t sample_k = kDefaultCurvatureK, sample_nk = kDefaultNormalsK;
  auto *sample = app.add_subcommand("sample", "Curvature-based ladder or farthest point subset");
  sample->add_option("--in", sample_in, "Input cloud")->required();
  sample->add_option("--method", sample_method, "curvature or fps")
      ->check(CLI::IsMember({"curvature", "fps"}))
      ->capture_default_str();
  auto *steps_opt = sample->add_option("--steps", sample_steps, "Ladder steps (curvature)")->capture_default_str();
  auto *count_opt = sample->add_option("--count", sample_count, "Subset size (fps)");
  sample->add_option("--start", sample_start, "First FPS index")->capture_default_str();
  sample->add_option("--k", sample_k, "Curvature neighbourhood size")->capture_default_str();
  sample->add_option("--normals-k", sample_nk, "Normal estimation neighbourhood size")->capture_default_str();
  sample->add_option("--out-prefix", sample_prefix, "Output path prefix")->required();
  sample->add_option("--format", sample_ext, "xyz or ply")->check(CLI::IsMember({"xyz", "ply"}))->capture_default_str();

  // make-patches
  std::vector<std::string> mp_shapes;
  std::size_t mp_per = 8, mp_n = 256, mp_rate = 4;
  std::uint64_t mp_seed = 0;
  std::string mp_dir;
  auto *mp = app.add_subcommand("make-patches", "Write normalized sparse/dense training patch pairs");
  mp->add_option("--shape", mp_shapes, "Oracle spec, repeatable (e.g. sphere:r=1)")->required();
  mp->add_option("--per-shape", mp_per, "Patches per shape")->capture_default_str()->check(CLI::PositiveNumber);
  mp->add_option("--sparse-n", mp_n, "Sparse points per patch")->capture_default_str();
  mp->add_option("--rate", mp_rate, "Dense/sparse ratio")->capture_default_str();
  mp->add_option("--seed", mp_seed, "RNG seed")->required();
  mp->add_option("--out-dir", mp_dir, "Output directory")->required();

  // split
  std::string split_glob, split_out;
  double split_threshold = 0.5;
  std::size_t split_k = kDefaultCurvatureK, split_nk = kDefaultNormalsK;
  auto *split = app.add_subcommand("split", "Classify patches as easy or hard by global curvature");
  split->add_option("--glob", split_glob, "Sparse patch files, e.g. data/patch_*.xyz")->required();
  split->add_option("--threshold", split_threshold, "Hard iff global curvature >= threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  split->add_option("--k", split_k, "Curvature neighbourhood size")->capture_default_str();
  split->add_option("--normals-k", split_nk, "Normal estimation neighbourhood size")->capture_default_str();
  split->add_option("--out", split_out, "Manifest CSV")->required();

  // train
  std::string train_cfg, train_data, train_out, train_loss;
  std::uint64_t train_seed = 0;
  auto *trn = app.add_subcommand("train", "Train the distance estimator");
  trn->add_option("--config", train_cfg, "key=value run config")->required();
  trn->add_option("--data", train_data, "Manifest from `split`; default: synthesize from the config");
  trn->add_option("--seed", train_seed, "RNG seed (overrides the config's seed)")->required();
  trn->add_option("--out", train_out, "Checkpoint JSON")->required();
  trn->add_option("--loss-out", train_loss, "Loss trace CSV (default: <out>.loss.csv)");

  // upsample
  std::string up_ckpt, up_oracle, up_in, up_out;
  double up_rate = 4.0;
  std::optional<double> up_lambda, up_sigma;
  std::optional<std::size_t> up_iters;
  std::uint64_t up_seed = 0;
  auto *up = app.add_subcommand("upsample", "Seed queries around the input and project them onto the surface");
  auto *ckpt_opt = up->add_option("--ckpt", up_ckpt, "Trained checkpoint");
  auto *oracle_opt = up->add_option("--oracle", up_oracle, "Analytic surface spec instead of a model");
  ckpt_opt->excludes(oracle_opt);
  up->add_option("--in", up_in, "Sparse input cloud")->required();
  up->add_option("--rate", up_rate, "Upsampling rate (> 1, may be fractional)")->capture_default_str();
  up->add_option("--lambda", up_lambda, "Projection step size (default 0.02 or the checkpoint's)");
  up->add_option("--iters", up_iters, "Projection iterations (default 10 or the checkpoint's)");
  up->add_option("--sigma-seed", up_sigma, "Seed jitter (default 0.02 or the checkpoint's)");
  up->add_option("--seed", up_seed, "RNG seed")->required();
  up->add_option("--out", up_out, "Output cloud")->required();

  // noise
  std::string noise_in, noise_out;
  double noise_tau = 0.0;
  std::uint64_t noise_seed = 0;
  auto *noise = app.add_subcommand("noise", "Add Gaussian noise to every coordinate");
  noise->add_option("--in", noise_in, "Input cloud")->required();
  noise->add_option("--tau", noise_tau, "Noise standard deviation")->required()->check(CLI::NonNegativeNumber);
  noise->add_option("--seed", noise_seed, "RNG seed")->required();
  noise->add_option("--out", noise_out, "Output cloud")->required();

  // eval
  std::string ev_pred, ev_gt, ev_mesh, ev_oracle, ev_out;
  auto *ev = app.add_subcommand("eval", "CD, HD and optional P2F of a prediction");
  ev->add_option("--pred", ev_pred, "Predicted cloud")->required();
  ev->add_option("--gt", ev_gt, "Ground-truth cloud")->required();
  auto *mesh_opt = ev->add_option("--mesh", ev_mesh, "ASCII OFF reference surface for P2F");
  auto *ev_oracle_opt = ev->add_option("--oracle", ev_oracle, "Analytic reference surface for P2F");
  mesh_opt->excludes(ev_oracle_opt);
  ev->add_option("--out", ev_out, "Report CSV (also printed)");

  // ablate-steps
  std::string ab_cfg, ab_steps = "0..5", ab_out;
  std::uint64_t ab_seed = 0;
  auto *ab = app.add_subcommand("ablate-steps", "Train and score one model per sampling-step setting");
  ab->add_option("--config", ab_cfg, "key=value run config")->required();
  ab->add_option("--steps", ab_steps, "Range a..b or list a,b,c")->capture_default_str();
  ab->add_option("--seed", ab_seed, "RNG seed (overrides the config's seed)")->required();
  ab->add_option("--out", ab_out, "Result CSV")->required();

  for (auto *sub : app.get_subcommands({}))
    sub->allow_extras(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "pcup: " << e.what() << "\n";
    if (const auto *sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
      err << "run `pcup " << sub->get_name() << " --help` for usage\n";
    else
      err << "run `pcup --help` for usage\n";
    return 2;
  }

  try {
    if (*synth) {
      const ShapeOracle shape = parse_oracle_spec(synth_params.empty() ? synth_shape : synth_shape + ":" + synth_params);
      write_cloud(sample_surface(shape, synth_points, synth_seed), synth_out);
      out << "wrote " << synth_points << " points to " << synth_out << "\n";
    } else if (*curv) {
      const PointCloud cloud = read_cloud(curv_in);
      const CurvatureField field = compute_curvature(cloud, curv_k, curv_nk);
      write_text_file(curv_out, format_curvature_csv(field));
      out << "global_curvature," << significant(global_curvature(field), 9) << "\n";
      out << "skewness," << significant(curvature_skewness(field), 9) << "\n";
    } else if (*sample) {
      const PointCloud cloud = read_cloud(sample_in);
      if (sample_method == "fps") {
        if (count_opt->count() == 0)
          throw UsageError("--method fps needs --count");
        const fs::path path = sample_prefix + "." + sample_ext;
        write_cloud(fps(cloud, sample_count, sample_start), path);
        out << "wrote " << sample_count << " points to " << path.string() << "\n";
      } else {
        if (count_opt->count() != 0)
          throw UsageError("--count applies to --method fps; use --steps");
        (void)steps_opt;
        const CurvatureField field = compute_curvature(cloud, sample_k, sample_nk);
        const SamplingLadder ladder = curvature_sample(cloud, field, sample_steps);
        for (std::size_t s = 0; s < ladder.clouds.size(); ++s) {
          const fs::path path = sample_prefix + "_level" + std::to_string(s) + "." + sample_ext;
          write_cloud(ladder.clouds[s], path);
          out << "level " << s << ": " << ladder.clouds[s].size() << " points -> " << path.string() << "\n";
        }
      }
    } else if (*mp) {
      std::vector<ShapeOracle> shapes;
      for (const auto &s : mp_shapes)
        shapes.push_back(parse_oracle_spec(s));
      const auto patches = make_patch_dataset(shapes, mp_per, mp_n, mp_rate, mp_seed);
      fs::create_directories(mp_dir);
      std::string index = "sparse,dense,oracle\n";
      for (std::size_t i = 0; i < patches.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "patch_%03zu", i);
        const fs::path sp = fs::path(mp_dir) / (std::string(name) + ".xyz");
        const fs::path dp = fs::path(mp_dir) / (std::string(name) + "_dense.xyz");
        write_cloud(patches[i].sparse, sp);
        write_cloud(patches[i].dense, dp);
        index += sp.filename().string() + "," + dp.filename().string() + "," +
                 format_oracle_spec(patches[i].frame_oracle()) + "\n";
      }
      // Oracle specs contain commas; the last column runs to the end of the line.
      write_text_file(fs::path(mp_dir) / "patches.csv", index);
      out << "wrote " << patches.size() << " patch pairs to " << mp_dir << "\n";
    } else if (*split) {
      std::vector<fs::path> files;
      for (const auto &p : expand_glob(split_glob))
        if (!is_dense_companion(p))
          files.push_back(p);
      if (files.empty())
        throw Error(ErrorCode::Io, "no files match " + split_glob);
      const fs::path base = fs::path(split_out).parent_path();
      std::string manifest = "sparse,dense,gcv,skewness,difficulty\n";
      std::size_t hard = 0;
      for (const auto &f : files) {
        const PointCloud cloud = read_cloud(f);
        const CurvatureField field = compute_curvature(cloud, split_k, split_nk);
        const double gcv = global_curvature(field);
        const Difficulty d = classify_difficulty(gcv, split_threshold);
        hard += d == Difficulty::Hard;
        const fs::path dense = dense_companion(f);
        manifest += relative_to(f, base) + "," + (fs::exists(dense) ? relative_to(dense, base) : std::string()) + "," +
                    significant(gcv, 9) + "," + significant(curvature_skewness(field), 9) + "," +
                    std::string(to_string(d)) + "\n";
      }
      write_text_file(split_out, manifest);
      out << files.size() << " patches: " << files.size() - hard << " easy, " << hard << " hard\n";
    } else if (*trn) {
      RunConfig cfg = load_run_config(train_cfg);
      cfg.train.seed = train_seed;
      std::vector<PatchPair> data;
      if (train_data.empty()) {
        data = training_patches(cfg);
      } else {
        for (const auto &row : read_manifest(train_data)) {
          PatchPair p;
          p.sparse = read_cloud(row.sparse);
          p.dense = read_cloud(row.dense);
          data.push_back(std::move(p));
        }
        if (data.empty())
          throw Error(ErrorCode::BadArgument, "manifest lists no patches");
      }
      const TrainResult r = train(data, cfg.train, [&](const EpochLoss &e) {
        out << "epoch " << e.epoch << " (" << to_string(e.phase) << ") loss " << significant(e.mean_loss, 6) << "\n";
      });
      save_checkpoint(r.checkpoint, train_out);
      const fs::path loss = train_loss.empty() ? fs::path(train_out + ".loss.csv") : fs::path(train_loss);
      write_text_file(loss, format_loss_trace_csv(r.trace));
      out << "wrote " << train_out << " after " << r.checkpoint.steps << " steps\n";
    } else if (*up) {
      if (ckpt_opt->count() == 0 && oracle_opt->count() == 0)
        throw UsageError("upsample needs --ckpt or --oracle");
      const PointCloud input = read_cloud(up_in);
      ProjectionParams params;
      PointCloud result;
      std::mt19937_64 rng(up_seed);
      if (ckpt_opt->count()) {
        const Checkpoint ckpt = load_checkpoint(up_ckpt);
        params = projection_from(ckpt.config);
        if (up_lambda) params.step_size = *up_lambda;
        if (up_iters) params.iterations = *up_iters;
        if (up_sigma) params.seed_sigma = *up_sigma;
        // The model works in the unit frame of its input.
        const auto [local, transform] = normalize(input);
        const LearnedField field = prepare_field(ckpt.model, local);
        result = transform.invert(upsample(field, local, up_rate, params, rng));
      } else {
        if (up_lambda) params.step_size = *up_lambda;
        if (up_iters) params.iterations = *up_iters;
        if (up_sigma) params.seed_sigma = *up_sigma;
        const OracleField field(parse_oracle_spec(up_oracle));
        result = upsample(field, input, up_rate, params, rng);
      }
      write_cloud(result, up_out);
      out << "wrote " << result.size() << " points to " << up_out << " (" << count_collapsed(result)
          << " collapsed duplicates)\n";
    } else if (*noise) {
      const PointCloud noisy = add_noise(read_cloud(noise_in), noise_tau, noise_seed);
      write_cloud(noisy, noise_out);
      out << "wrote " << noisy.size() << " points to " << noise_out << "\n";
    } else if (*ev) {
      const PointCloud pred = read_cloud(ev_pred);
      const PointCloud gt = read_cloud(ev_gt);
      std::optional<SurfaceRef> surface;
      if (mesh_opt->count())
        surface = read_off(ev_mesh);
      else if (ev_oracle_opt->count())
        surface = parse_oracle_spec(ev_oracle);
      const MetricReport report = evaluate(pred, gt, surface ? &*surface : nullptr);
      const std::string csv = format_report_csv(report);
      if (!ev_out.empty())
        write_text_file(ev_out, csv);
      out << csv;
    } else if (*ab) {
      RunConfig cfg = load_run_config(ab_cfg);
      cfg.train.seed = ab_seed;
      const auto steps = parse_step_list(ab_steps);
      const auto rows = ablate_sampling_steps(cfg, steps, [&](const std::string &msg) { out << msg << "\n"; });
      const std::string csv = format_ablation_csv(rows);
      write_text_file(ab_out, csv);
      out << csv;
    }
  } catch (const UsageError &e) {
    err << "pcup: " << e.what() << "\n";
    return 2;
  } catch (const Error &e) {
    err << "pcup: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    err << "pcup: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace pcup::cli

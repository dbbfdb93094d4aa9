#include "pcup/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>

#include "pcup/error.hpp"
#include "pcup/format.hpp"
#include "pcup/io.hpp"

namespace pcup {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Ctx {
  std::string key;
  std::size_t line;
  [[noreturn]] void fail(const std::string &why) const {
    throw Error(ErrorCode::BadConfig, "line " + std::to_string(line) + ": key '" + key + "': " + why);
  }
};

double parse_real(std::string_view v, const Ctx &c) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(out))
    c.fail("'" + std::string(v) + "' is not a finite number");
  return out;
}

std::uint64_t parse_uint(std::string_view v, const Ctx &c) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
    c.fail("'" + std::string(v) + "' is not a non-negative integer");
  return out;
}

bool parse_bool(std::string_view v, const Ctx &c) {
  if (v == "true" || v == "1")
    return true;
  if (v == "false" || v == "0")
    return false;
  c.fail("'" + std::string(v) + "' is not true/false");
}

using Setter = std::function<void(RunConfig &, std::string_view, const Ctx &)>;

const std::map<std::string, Setter, std::less<>> &setters() {
  auto size = [](std::size_t TrainConfig::*f) {
    return Setter([f](RunConfig &r, std::string_view v, const Ctx &c) { r.train.*f = parse_uint(v, c); });
  };
  auto real = [](double TrainConfig::*f) {
    return Setter([f](RunConfig &r, std::string_view v, const Ctx &c) { r.train.*f = parse_real(v, c); });
  };
  auto flag = [](bool TrainConfig::*f) {
    return Setter([f](RunConfig &r, std::string_view v, const Ctx &c) { r.train.*f = parse_bool(v, c); });
  };
  auto run_size = [](std::size_t RunConfig::*f) {
    return Setter([f](RunConfig &r, std::string_view v, const Ctx &c) { r.*f = parse_uint(v, c); });
  };
  static const std::map<std::string, Setter, std::less<>> table = {
      {"epochs", size(&TrainConfig::epochs)},
      {"threshold", real(&TrainConfig::threshold)},
      {"learning_rate", real(&TrainConfig::learning_rate)},
      {"batch_size", size(&TrainConfig::batch_size)},
      {"queries_per_patch", size(&TrainConfig::queries_per_patch)},
      {"query_sigma", real(&TrainConfig::query_sigma)},
      {"max_steps", size(&TrainConfig::max_steps)},
      {"curriculum", flag(&TrainConfig::curriculum)},
      {"rotate", flag(&TrainConfig::rotate)},
      {"seed", Setter([](RunConfig &r, std::string_view v, const Ctx &c) { r.train.seed = parse_uint(v, c); })},
      {"feature_dim", size(&TrainConfig::feature_dim)},
      {"hidden", size(&TrainConfig::hidden)},
      {"sampling_steps", size(&TrainConfig::sampling_steps)},
      {"curvature_k", size(&TrainConfig::curvature_k)},
      {"normals_k", size(&TrainConfig::normals_k)},
      {"sharpness", real(&TrainConfig::sharpness)},
      {"lambda", real(&TrainConfig::step_size)},
      {"iterations", size(&TrainConfig::iterations)},
      {"sigma_seed", real(&TrainConfig::seed_sigma)},
      {"shape", Setter([](RunConfig &r, std::string_view v, const Ctx &c) {
         try {
           r.shapes.push_back(parse_oracle_spec(v));
         } catch (const Error &e) {
           c.fail(e.detail());
         }
       })},
      {"patches_per_shape", run_size(&RunConfig::patches_per_shape)},
      {"sparse_n", run_size(&RunConfig::sparse_n)},
      {"rate", run_size(&RunConfig::rate)},
      {"data_seed", Setter([](RunConfig &r, std::string_view v, const Ctx &c) { r.data_seed = parse_uint(v, c); })},
      {"eval_patches", run_size(&RunConfig::eval_patches)},
  };
  return table;
}

} // namespace

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::BadConfig, "line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                                            std::string(line) + "'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const Ctx ctx{key, line_no};
    const auto it = setters().find(key);
    if (it == setters().end())
      ctx.fail("unknown key");
    if (value.empty())
      ctx.fail("missing value");
    if (key != "shape" && !seen.insert(key).second)
      ctx.fail("duplicate key");
    it->second(cfg, value, ctx);
  }
  try {
    cfg.train.validate();
  } catch (const Error &e) {
    throw Error(ErrorCode::BadConfig, e.detail());
  }
  auto positive = [](std::size_t v, const char *name) {
    if (v == 0)
      throw Error(ErrorCode::BadConfig, std::string(name) + ": must be >= 1");
  };
  positive(cfg.patches_per_shape, "patches_per_shape");
  positive(cfg.eval_patches, "eval_patches");
  if (cfg.rate < 2)
    throw Error(ErrorCode::BadConfig, "rate: must be >= 2");
  if (cfg.sparse_n < 32)
    throw Error(ErrorCode::BadConfig, "sparse_n: must be >= 32");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  const std::string text = read_text_file(path);
  try {
    return parse_run_config(text);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::string format_run_config(const RunConfig &c) {
  const TrainConfig &t = c.train;
  std::string out;
  auto kv = [&](const char *k, const std::string &v) { out += std::string(k) + " = " + v + "\n"; };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  kv("epochs", std::to_string(t.epochs));
  kv("threshold", shortest(t.threshold));
  kv("learning_rate", shortest(t.learning_rate));
  kv("batch_size", std::to_string(t.batch_size));
  kv("queries_per_patch", std::to_string(t.queries_per_patch));
  kv("query_sigma", shortest(t.query_sigma));
  kv("max_steps", std::to_string(t.max_steps));
  kv("curriculum", b(t.curriculum));
  kv("rotate", b(t.rotate));
  kv("seed", std::to_string(t.seed));
  kv("feature_dim", std::to_string(t.feature_dim));
  kv("hidden", std::to_string(t.hidden));
  kv("sampling_steps", std::to_string(t.sampling_steps));
  kv("curvature_k", std::to_string(t.curvature_k));
  kv("normals_k", std::to_string(t.normals_k));
  kv("sharpness", shortest(t.sharpness));
  kv("lambda", shortest(t.step_size));
  kv("iterations", std::to_string(t.iterations));
  kv("sigma_seed", shortest(t.seed_sigma));
  for (const auto &s : c.shapes)
    kv("shape", format_oracle_spec(s));
  kv("patches_per_shape", std::to_string(c.patches_per_shape));
  kv("sparse_n", std::to_string(c.sparse_n));
  kv("rate", std::to_string(c.rate));
  kv("data_seed", std::to_string(c.data_seed));
  kv("eval_patches", std::to_string(c.eval_patches));
  return out;
}

} // namespace pcup

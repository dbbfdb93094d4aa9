#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pcup/shapes.hpp"
#include "pcup/training.hpp"
#include "pcup/upsampler.hpp"

namespace pcup {

/// Everything a `train` or `ablate-steps` run needs: trainer settings plus
/// the synthetic dataset recipe used when no manifest is given.
struct RunConfig {
  TrainConfig train;
  std::vector<ShapeOracle> shapes; // one `shape = SPEC` line each
  std::size_t patches_per_shape = 8;
  std::size_t sparse_n = 256;
  std::size_t rate = 4;
  std::uint64_t data_seed = 1;
  std::size_t eval_patches = 2;

  ProjectionParams projection() const {
    return {train.step_size, train.iterations, train.seed_sigma};
  }
};

/// `key = value` lines; `#` starts a comment. Unknown keys, duplicate keys
/// (except `shape`) and bad values throw BadConfig naming the key and line.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path &path);
std::string format_run_config(const RunConfig &config);

} // namespace pcup

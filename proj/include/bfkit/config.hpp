#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "bfkit/imgio.hpp"
#include "bfkit/solver.hpp"

namespace bfkit {

// Declarative run configuration. JSON layout:
//   { "solver": {clusters, fuzziness, max_iters, tol, epsilon,
//                membership_mode, center_convention, jitter},
//     "kernel": {size, sigma},
//     "mask":   {levels, bins},
//     "tv":     {enabled, variant, steps, step_size},
//     "io":     {format, output_dir},
//     "seed":   0 }
// Every key is optional; unknown keys are rejected.
struct RunConfig {
  SolverConfig solver;
  std::size_t mask_levels = 3;
  std::size_t mask_bins = 256;
  ImageFormat format = ImageFormat::bf32;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
};

// Throws ConfigError listing every offending key.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& cfg);

}  // namespace bfkit

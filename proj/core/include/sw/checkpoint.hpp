#pragma once

#include <filesystem>
#include <string>

#include "sw/sw_config.hpp"
#include "sw/sw_layer.hpp"

namespace sw {

// Checkpoint layout:
//   16 bytes  magic "SWCKPT01" followed by 8 NUL bytes
//   u32       manifest length in bytes (little-endian)
//   ...       JSON manifest {omega, G, eps, alpha, T, path, step_count,
//             channels, fields}
//   ...       one tensor record per entry of "fields", in order:
//             lambda_mean, lambda_cov, gamma, beta, then running_mean[g],
//             running_cov[g] for each group g.

template <typename T>
struct Checkpoint {
  SwConfig config;
  SwState<T> state;
};

/// Writes f32 records for float states and f64 for double states.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const SwState<T>& state, const SwConfig& config);

/// Throws FileError when the file cannot be read and FormatError when it is
/// malformed.
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path);

/// JSON object describing a configuration (the manifest's config keys).
std::string config_to_json(const SwConfig& config);
/// Applies the keys present in `json` on top of `base`.
SwConfig config_from_json(const std::string& json, SwConfig base = {});

}  // namespace sw

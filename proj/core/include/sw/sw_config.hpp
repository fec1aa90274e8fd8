#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sw/stats.hpp"
#include "sw/whitening.hpp"

namespace sw {

/// Hyperparameters of one switchable whitening layer.
struct SwConfig {
  std::vector<Method> omega{Method::BW, Method::IW};
  std::size_t group_size = 16;
  double eps = 1e-5;
  double momentum = 0.1;
  WhiteningPath path = WhiteningPath::eigen();
  /// Groups of a layer always share one set of importance weights.
  bool share_lambda_across_groups = true;
  /// Worker cap for per-sample work inside forward/backward.
  unsigned threads = 1;

  static SwConfig whitening_only();  // {bw, iw}
  static SwConfig full();            // {bw, iw, bn, in, ln}

  /// Throws ConfigError on an empty or repeated method set, eps <= 0,
  /// momentum outside [0, 1], zero group size or a Newton count below 1.
  void validate() const;
  /// validate() plus the requirement that group_size divides `channels`.
  void validate_for(std::size_t channels) const;

  std::size_t group_count(std::size_t channels) const { return channels / group_size; }
  /// Position of m in omega, or -1.
  int index_of(Method m) const noexcept;
  bool contains(Method m) const noexcept { return index_of(m) >= 0; }
};

/// "bw,iw" -> {BW, IW}. Throws ConfigError.
std::vector<Method> parse_omega(std::string_view csv);
std::string omega_to_string(const std::vector<Method>& omega);

}  // namespace sw

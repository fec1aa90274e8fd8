#pragma once

#include <cstdint>
#include <vector>

#include "sw/tensor.hpp"

namespace sw {

/// Class-prototype images with a random per-sample, per-channel affine
/// "style" (scale exp(0.5 * s * z), shift s * z') and Gaussian pixel noise.
struct SyntheticSpec {
  std::size_t classes = 2;
  std::size_t samples_per_class = 256;
  std::size_t channels = 4;
  std::size_t height = 4;
  std::size_t width = 4;
  double style_strength = 0.0;
  double noise = 0.1;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

struct Dataset {
  Tensor4<double> x;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t classes = 0;
};

/// Samples are interleaved by class (0, 1, ..., K-1, 0, 1, ...).
Dataset generate_dataset(const SyntheticSpec& spec);

/// Copies the listed samples into a new batch.
Dataset gather(const Dataset& data, const std::vector<std::size_t>& indices);

}  // namespace sw

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sw/sw_config.hpp"
#include "sw/tensor.hpp"

namespace sw {

/// Wall time of forward_train for one (path, shape, G), warm-up excluded.
struct BenchResult {
  std::string path;
  Shape4 shape{};
  std::size_t group_size = 0;
  std::size_t repetitions = 0;
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;

  static std::string csv_header();  // path,n,c,h,w,G,reps,mean_s,stddev_s
  std::string to_csv() const;
};

/// reps < 10 is a ConfigError. float or double.
template <typename T>
BenchResult bench_forward(Shape4 shape, const SwConfig& config, std::size_t reps, std::size_t warmup,
                          std::uint64_t seed);

/// (N, HW), (2N, HW), (2N, 2HW), (4N, 2HW); HW doubles through W.
std::vector<Shape4> scaling_sweep(Shape4 base);

/// N * C * G * max(HW, G).
double complexity_units(Shape4 shape, std::size_t group_size);

struct ScalingFit {
  double constant = 0.0;            // seconds per unit, geometric mean
  std::vector<double> ratios;       // measured / (constant * units)
  double worst_factor = 0.0;        // max over points of max(r, 1/r)
};

ScalingFit fit_complexity(const std::vector<BenchResult>& results);

}  // namespace sw

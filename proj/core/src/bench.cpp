#include "sw/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "sw/errors.hpp"
#include "sw/sw_layer.hpp"

namespace sw {

std::string BenchResult::csv_header() { return "path,n,c,h,w,G,reps,mean_s,stddev_s"; }

std::string BenchResult::to_csv() const {
  std::ostringstream os;
  os.precision(6);
  os << path << ',' << shape.n << ',' << shape.c << ',' << shape.h << ',' << shape.w << ',' << group_size << ','
     << repetitions << ',' << std::scientific << mean_seconds << ',' << stddev_seconds;
  return os.str();
}

template <typename T>
BenchResult bench_forward(Shape4 shape, const SwConfig& config, std::size_t reps, std::size_t warmup,
                          std::uint64_t seed) {
  if (reps < 10) throw ConfigError("bench: repetitions must be at least 10");
  config.validate_for(shape.c);
  if (shape.numel() == 0) throw ConfigError("bench: empty shape " + shape.to_string());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor4<T> x(shape);
  for (auto& v : x.data()) v = static_cast<T>(normal(rng));
  SwState<T> state = SwState<T>::fresh(config, shape.c);

  for (std::size_t i = 0; i < warmup; ++i) (void)forward_train(x, state, config);

  std::vector<double> times;
  times.reserve(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = forward_train(x, state, config);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }

  double mean = 0.0;
  for (const double t : times) mean += t;
  mean /= static_cast<double>(reps);
  double var = 0.0;
  for (const double t : times) var += (t - mean) * (t - mean);
  var /= static_cast<double>(reps - 1);

  BenchResult r;
  r.path = config.path.name();
  r.shape = shape;
  r.group_size = config.group_size;
  r.repetitions = reps;
  r.mean_seconds = mean;
  r.stddev_seconds = std::sqrt(var);
  return r;
}

template BenchResult bench_forward<float>(Shape4, const SwConfig&, std::size_t, std::size_t, std::uint64_t);
template BenchResult bench_forward<double>(Shape4, const SwConfig&, std::size_t, std::size_t, std::uint64_t);

std::vector<Shape4> scaling_sweep(Shape4 base) {
  Shape4 a = base;
  Shape4 b = base;
  b.n *= 2;
  Shape4 c = b;
  c.w *= 2;
  Shape4 d = c;
  d.n *= 2;
  return {a, b, c, d};
}

double complexity_units(Shape4 shape, std::size_t group_size) {
  const double hw = static_cast<double>(shape.pixels());
  const double g = static_cast<double>(group_size);
  return static_cast<double>(shape.n) * static_cast<double>(shape.c) * g * std::max(hw, g);
}

ScalingFit fit_complexity(const std::vector<BenchResult>& results) {
  ScalingFit fit;
  if (results.empty()) return fit;
  double log_sum = 0.0;
  for (const auto& r : results) log_sum += std::log(r.mean_seconds / complexity_units(r.shape, r.group_size));
  fit.constant = std::exp(log_sum / static_cast<double>(results.size()));
  for (const auto& r : results) {
    const double ratio = r.mean_seconds / (fit.constant * complexity_units(r.shape, r.group_size));
    fit.ratios.push_back(ratio);
    fit.worst_factor = std::max(fit.worst_factor, std::max(ratio, 1.0 / ratio));
  }
  return fit;
}

}  // namespace sw

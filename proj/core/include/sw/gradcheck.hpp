#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sw/sw_config.hpp"
#include "sw/tensor.hpp"

namespace sw {

/// Outcome of comparing one analytic gradient block against finite differences.
struct GradReport {
  enum class Status { Pass, Fail, Skip };

  std::string parameter;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
  double tolerance = 0.0;
  Status status = Status::Pass;

  // Context for the JSON line.
  std::uint64_t seed = 0;
  std::string omega;
  std::string path;
  Shape4 shape{};
  std::string note;

  bool passed() const noexcept { return status == Status::Pass; }
  /// Single-line JSON object.
  std::string to_json() const;
};

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
/// Throws OracleFailure if f returns a non-finite value.
std::vector<double> numeric_grad(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> x, double h);

/// Builds a report for one parameter block.
GradReport compare_gradients(const std::string& parameter, std::span<const double> analytic,
                             std::span<const double> numeric, double tol);

struct GradCheckOptions {
  double tol = 1e-4;
  /// Finite-difference step relative to max(1, rms(parameter block)).
  double step = 1e-5;
  /// Use dy = 0 as the upstream gradient.
  bool zero_upstream = false;
  /// Fresh-seed retries when the eigen backward reports a degenerate spectrum.
  int max_reseeds = 3;
};

/// Checks dx, dlambda_mean, dlambda_cov, dgamma and dbeta of one randomly
/// initialized layer against finite differences of the probe loss
/// L = <dy, y> in float64. Deterministic for a given seed.
std::vector<GradReport> check_sw_layer(const SwConfig& config, Shape4 shape, std::uint64_t seed,
                                       const GradCheckOptions& options = {});

struct SuiteOptions {
  std::vector<std::vector<Method>> omegas{{Method::BW, Method::IW},
                                          {Method::BW, Method::IW, Method::BN, Method::IN, Method::LN}};
  std::vector<WhiteningPath> paths{WhiteningPath::eigen(), WhiteningPath::newton(5)};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  Shape4 shape{4, 8, 3, 3};
  std::size_t group_size = 4;
  GradCheckOptions check{};
};

/// Every (omega, path, seed) combination of the options.
std::vector<GradReport> run_gradcheck_suite(const SuiteOptions& options);

}  // namespace sw

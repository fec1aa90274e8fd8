#include "sw/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "sw/errors.hpp"
#include "sw/sw_layer.hpp"

namespace sw {

std::string GradReport::to_json() const {
  nlohmann::json j;
  j["parameter"] = parameter;
  j["status"] = status == Status::Pass ? "pass" : status == Status::Fail ? "fail" : "skip";
  j["max_rel_error"] = max_rel_error;
  j["max_abs_error"] = max_abs_error;
  j["worst_index"] = worst_index;
  j["tolerance"] = tolerance;
  j["seed"] = seed;
  j["omega"] = omega;
  j["path"] = path;
  j["shape"] = {shape.n, shape.c, shape.h, shape.w};
  if (!note.empty()) j["note"] = note;
  return j.dump();
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

std::vector<double> numeric_grad(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> x, double h) {
  if (!(h > 0.0)) throw ConfigError("numeric_grad: step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw OracleFailure("numeric_grad: non-finite function value at coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

GradReport compare_gradients(const std::string& parameter, std::span<const double> analytic,
                             std::span<const double> numeric, double tol) {
  if (analytic.size() != numeric.size()) throw ShapeError("compare_gradients: length mismatch");
  GradReport r;
  r.parameter = parameter;
  r.tolerance = tol;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double rel = relative_error(analytic[i], numeric[i]);
    const double abs_err = std::abs(analytic[i] - numeric[i]);
    if (rel > r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst_index = i;
    }
    r.max_abs_error = std::max(r.max_abs_error, abs_err);
  }
  r.status = r.max_rel_error <= tol ? GradReport::Status::Pass : GradReport::Status::Fail;
  return r;
}

namespace {

struct Problem {
  Tensor4<double> x;
  Tensor4<double> dy;
  SwState<double> state;
};

Problem make_problem(const SwConfig& config, Shape4 shape, std::uint64_t seed, bool zero_upstream) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.5, 1.5);

  Problem p{Tensor4<double>(shape), Tensor4<double>(shape), SwState<double>::fresh(config, shape.c)};
  for (auto& v : p.x.data()) v = normal(rng);
  for (auto& v : p.dy.data()) v = zero_upstream ? 0.0 : normal(rng);
  for (auto& v : p.state.lambda_mean) v = uniform(rng);
  for (auto& v : p.state.lambda_cov) v = uniform(rng);
  for (auto& v : p.state.gamma) v = uniform(rng);
  for (auto& v : p.state.beta) v = normal(rng);
  return p;
}

double probe_loss(const Tensor4<double>& x, const Tensor4<double>& dy, SwState<double> state,
                  const SwConfig& config) {
  const Tensor4<double> y = forward_train(x, state, config).y;
  double loss = 0.0;
  const auto a = y.data();
  const auto b = dy.data();
  for (std::size_t i = 0; i < a.size(); ++i) loss += a[i] * b[i];
  return loss;
}

double step_for(std::span<const double> v, double rel) {
  double ss = 0.0;
  for (const double x : v) ss += x * x;
  const double rms = v.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(v.size()));
  return rel * std::max(1.0, rms);
}

// Numeric gradient of the probe loss with respect to one state vector.
std::vector<double> numeric_state_grad(const Problem& p, const SwConfig& config,
                                       std::vector<double> SwState<double>::*field, double rel_step) {
  const std::vector<double>& base = p.state.*field;
  return numeric_grad(
      [&](std::span<const double> v) {
        SwState<double> s = p.state;
        (s.*field).assign(v.begin(), v.end());
        return probe_loss(p.x, p.dy, std::move(s), config);
      },
      base, step_for(base, rel_step));
}

}  // namespace

std::vector<GradReport> check_sw_layer(const SwConfig& config, Shape4 shape, std::uint64_t seed,
                                       const GradCheckOptions& options) {
  config.validate_for(shape.c);
  std::string note;
  for (int attempt = 0; attempt <= options.max_reseeds; ++attempt) {
    const std::uint64_t effective_seed = seed + static_cast<std::uint64_t>(attempt) * 7919u;
    Problem p = make_problem(config, shape, effective_seed, options.zero_upstream);

    SwGradients<double> analytic;
    try {
      SwState<double> s = p.state;
      const TrainResult<double> fwd = forward_train(p.x, s, config);
      analytic = backward(p.dy, fwd.cache, p.state, config);
    } catch (const DegenerateSpectrum& e) {
      note = e.what();
      continue;
    }

    std::vector<GradReport> reports;
    const auto add = [&](const std::string& name, std::span<const double> a, const std::vector<double>& n) {
      GradReport r = compare_gradients(name, a, n, options.tol);
      r.seed = seed;
      r.omega = omega_to_string(config.omega);
      r.path = config.path.name();
      r.shape = shape;
      if (attempt > 0) r.note = "reseeded " + std::to_string(attempt) + "x after degenerate spectrum";
      reports.push_back(std::move(r));
    };

    const std::vector<double> x0(p.x.data().begin(), p.x.data().end());
    const auto ndx = numeric_grad(
        [&](std::span<const double> v) {
          Tensor4<double> xp = Tensor4<double>::from_data(shape, std::vector<double>(v.begin(), v.end()));
          return probe_loss(xp, p.dy, p.state, config);
        },
        x0, step_for(x0, options.step));
    add("dx", analytic.dx.data(), ndx);
    add("dlambda_mean", analytic.dlambda_mean, numeric_state_grad(p, config, &SwState<double>::lambda_mean, options.step));
    add("dlambda_cov", analytic.dlambda_cov, numeric_state_grad(p, config, &SwState<double>::lambda_cov, options.step));
    add("dgamma", analytic.dgamma, numeric_state_grad(p, config, &SwState<double>::gamma, options.step));
    add("dbeta", analytic.dbeta, numeric_state_grad(p, config, &SwState<double>::beta, options.step));
    return reports;
  }

  std::vector<GradReport> skipped;
  for (const char* name : {"dx", "dlambda_mean", "dlambda_cov", "dgamma", "dbeta"}) {
    GradReport r;
    r.parameter = name;
    r.status = GradReport::Status::Skip;
    r.tolerance = options.tol;
    r.seed = seed;
    r.omega = omega_to_string(config.omega);
    r.path = config.path.name();
    r.shape = shape;
    r.note = note;
    skipped.push_back(std::move(r));
  }
  return skipped;
}

std::vector<GradReport> run_gradcheck_suite(const SuiteOptions& options) {
  std::vector<GradReport> all;
  for (const auto& omega : options.omegas) {
    for (const auto& path : options.paths) {
      SwConfig config;
      config.omega = omega;
      config.path = path;
      config.group_size = options.group_size;
      for (const auto seed : options.seeds) {
        auto reports = check_sw_layer(config, options.shape, seed, options.check);
        all.insert(all.end(), std::make_move_iterator(reports.begin()), std::make_move_iterator(reports.end()));
      }
    }
  }
  return all;
}

}  // namespace sw

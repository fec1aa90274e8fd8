#include <iostream>
#include <memory>

#include "commands.hpp"
#include "options.hpp"
#include "sw/errors.hpp"
#include "sw/gradcheck.hpp"

namespace swhiten {
namespace {

struct GradcheckOptions {
  CommonOptions common;
  std::string omega;  // empty: both presets
  std::string path = "all";
  double tol = 1e-4;
  double step = 1e-5;
  std::size_t seeds = 5;
  std::string shape = "4,8,3,3";
  std::size_t group_size = 4;
  int newton_iters = 5;
  bool zero_upstream = false;
};

int run(const GradcheckOptions& o, const CLI::App& cmd) {
  const Resolver r(cmd, o.common);
  sw::SuiteOptions suite;
  const std::string omega = r.pick<std::string>("--omega", "omega", o.omega);
  if (!omega.empty()) suite.omegas = {sw::parse_omega(omega)};
  const int iters = r.pick<int>("--newton-iters", "T", o.newton_iters);
  const std::string path = r.pick<std::string>("--path", "path", o.path);
  if (path == "all") {
    suite.paths = {sw::WhiteningPath::eigen(), sw::WhiteningPath::newton(iters)};
  } else {
    suite.paths = {sw::parse_path(path, iters)};
  }
  const auto dims = parse_size_list(r.pick<std::string>("--shape", "shape", o.shape));
  if (dims.size() != 4) throw sw::ConfigError("--shape needs N,C,H,W");
  suite.shape = {dims[0], dims[1], dims[2], dims[3]};
  suite.group_size = r.pick<std::size_t>("--G", "G", o.group_size);
  suite.check.tol = r.pick<double>("--tol", "tol", o.tol);
  suite.check.step = r.pick<double>("--step", "step", o.step);
  suite.check.zero_upstream = o.zero_upstream;
  const std::uint64_t seed = r.seed();
  const std::size_t count = r.pick<std::size_t>("--seeds", "seeds", o.seeds);
  suite.seeds.clear();
  for (std::size_t i = 1; i <= count; ++i) suite.seeds.push_back(seed + i);
  if (r.dtype() != "f64") std::cerr << "note: gradcheck always runs in f64\n";

  nlohmann::json echo;
  echo["omega"] = nlohmann::json::array();
  for (const auto& om : suite.omegas) echo["omega"].push_back(sw::omega_to_string(om));
  echo["path"] = nlohmann::json::array();
  for (const auto& p : suite.paths) echo["path"].push_back(p.name());
  echo["T"] = iters;
  echo["tol"] = suite.check.tol;
  echo["step"] = suite.check.step;
  echo["seeds"] = suite.seeds;
  echo["shape"] = dims;
  echo["G"] = suite.group_size;
  echo["zero_upstream"] = suite.check.zero_upstream;
  echo["dtype"] = "f64";
  echo_config("gradcheck", echo);

  const auto reports = sw::run_gradcheck_suite(suite);
  std::size_t passed = 0;
  std::size_t skipped = 0;
  double worst = 0.0;
  for (const auto& rep : reports) {
    std::cout << rep.to_json() << '\n';
    if (rep.passed()) ++passed;
    if (rep.status == sw::GradReport::Status::Skip) ++skipped;
    worst = std::max(worst, rep.max_rel_error);
  }
  std::cerr << "gradcheck: " << passed << "/" << reports.size() << " passed, " << skipped
            << " skipped, worst relative error " << worst << '\n';
  return passed == reports.size() ? 0 : 1;
}

}  // namespace

void register_gradcheck(CLI::App& root, int& status) {
  auto opts = std::make_shared<GradcheckOptions>();
  CLI::App* cmd = root.add_subcommand("gradcheck", "Finite-difference check of the analytic backward pass");
  add_common(*cmd, opts->common);
  cmd->add_option("--omega", opts->omega, "Restrict to one statistics set, e.g. bw,iw");
  cmd->add_option("--path", opts->path, "eigen, newton or all")->capture_default_str();
  cmd->add_option("--tol", opts->tol, "Relative error tolerance")->capture_default_str();
  cmd->add_option("--step", opts->step, "Relative finite-difference step")->capture_default_str();
  cmd->add_option("--seeds", opts->seeds, "Number of seeds")->capture_default_str();
  cmd->add_option("--shape", opts->shape, "N,C,H,W")->capture_default_str();
  cmd->add_option("--G", opts->group_size, "Group size")->capture_default_str();
  cmd->add_option("--newton-iters", opts->newton_iters, "Newton iterations")->capture_default_str();
  cmd->add_flag("--zero-upstream", opts->zero_upstream, "Use dy = 0");
  cmd->callback([opts, cmd, &status] { status = run(*opts, *cmd); });
}

}  // namespace swhiten

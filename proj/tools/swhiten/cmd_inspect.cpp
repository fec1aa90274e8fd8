#include <cmath>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "options.hpp"
#include "sw/checkpoint.hpp"
#include "sw/sw_layer.hpp"

namespace swhiten {
namespace {

struct InspectOptions {
  CommonOptions common;
  std::string checkpoint;
};

int run(const InspectOptions& o, const CLI::App& cmd) {
  const Resolver r(cmd, o.common);
  nlohmann::json echo;
  echo["checkpoint"] = o.checkpoint;
  echo_config("inspect", echo);

  const auto ck = sw::load_checkpoint<double>(o.checkpoint);
  const auto& s = ck.state;
  nlohmann::json out = nlohmann::json::parse(sw::config_to_json(ck.config));
  out["step_count"] = s.step_count;
  out["channels"] = s.channels();
  out["lambda_mean"] = s.lambda_mean;
  out["lambda_cov"] = s.lambda_cov;
  out["omega_mean"] = sw::importance_weights<double>(s.lambda_mean);
  out["omega_cov"] = sw::importance_weights<double>(s.lambda_cov);
  std::vector<double> mean_norms;
  std::vector<double> cov_norms;
  for (const auto& m : s.running_mean) {
    double ss = 0.0;
    for (const double v : m) ss += v * v;
    mean_norms.push_back(std::sqrt(ss));
  }
  for (const auto& c : s.running_cov) cov_norms.push_back(sw::frobenius_norm(c.matrix()));
  out["running_mean_norm"] = mean_norms;
  out["running_cov_frobenius"] = cov_norms;
  std::cout << out.dump() << '\n';

  std::cerr << o.checkpoint << ": " << s.channels() << " channels, G=" << ck.config.group_size
            << ", step " << s.step_count << '\n';
  const auto wm = out["omega_mean"].get<std::vector<double>>();
  const auto wc = out["omega_cov"].get<std::vector<double>>();
  for (std::size_t k = 0; k < ck.config.omega.size(); ++k) {
    std::cerr << "  " << sw::to_string(ck.config.omega[k]) << ": omega " << wm[k] << ", omega' " << wc[k] << '\n';
  }
  return 0;
}

}  // namespace

void register_inspect(CLI::App& root, int& status) {
  auto opts = std::make_shared<InspectOptions>();
  CLI::App* cmd = root.add_subcommand("inspect", "Print the contents of a layer checkpoint as JSON");
  add_common(*cmd, opts->common);
  cmd->add_option("--checkpoint", opts->checkpoint, "Checkpoint file")->required();
  cmd->callback([opts, cmd, &status] { status = run(*opts, *cmd); });
}

}  // namespace swhiten

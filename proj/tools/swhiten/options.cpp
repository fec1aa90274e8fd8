#include "options.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "sw/checkpoint.hpp"
#include "sw/errors.hpp"

namespace swhiten {

void add_common(CLI::App& cmd, CommonOptions& common) {
  cmd.add_option("--seed", common.seed, "Random seed")->capture_default_str();
  cmd.add_option("--dtype", common.dtype, "Scalar type: f32 or f64")->capture_default_str();
  cmd.add_option("--config", common.config_path, "JSON configuration file");
  cmd.add_option("--threads", common.threads, "Worker thread cap")->capture_default_str();
}

void add_sw_flags(CLI::App& cmd, SwFlags& flags, const sw::SwConfig& defaults) {
  flags.omega = sw::omega_to_string(defaults.omega);
  flags.path = defaults.path.name();
  flags.group_size = defaults.group_size;
  flags.eps = defaults.eps;
  flags.momentum = defaults.momentum;
  flags.newton_iters = defaults.path.iterations;
  cmd.add_option("--omega", flags.omega, "Statistics set, e.g. bw,iw")->capture_default_str();
  cmd.add_option("--path", flags.path, "Whitening path: eigen or newton")->capture_default_str();
  cmd.add_option("--G", flags.group_size, "Group size")->capture_default_str();
  cmd.add_option("--eps", flags.eps, "Covariance regularizer")->capture_default_str();
  cmd.add_option("--momentum", flags.momentum, "Running-statistics momentum")->capture_default_str();
  cmd.add_option("--newton-iters", flags.newton_iters, "Newton iterations")->capture_default_str();
}

Resolver::Resolver(const CLI::App& cmd, const CommonOptions& common) : cmd_(cmd), common_(common) {
  if (common.config_path.empty()) return;
  std::ifstream in(common.config_path);
  if (!in) throw sw::FileError("cannot open config file: " + common.config_path);
  try {
    file_ = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw sw::ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!file_.is_object()) throw sw::ConfigError("config file must hold a JSON object");
}

sw::SwConfig Resolver::sw_config(const SwFlags& flags, sw::SwConfig base) const {
  sw::SwConfig c = sw::config_from_json(file_.dump(), base);
  if (cmd_.count("--omega") > 0) c.omega = sw::parse_omega(flags.omega);
  if (cmd_.count("--newton-iters") > 0) c.path.iterations = flags.newton_iters;
  if (cmd_.count("--path") > 0) c.path = sw::parse_path(flags.path, c.path.iterations);
  if (cmd_.count("--G") > 0) c.group_size = flags.group_size;
  if (cmd_.count("--eps") > 0) c.eps = flags.eps;
  if (cmd_.count("--momentum") > 0) c.momentum = flags.momentum;
  c.threads = threads();
  c.validate();
  return c;
}

unsigned Resolver::threads() const {
  const unsigned t = pick<unsigned>("--threads", "threads", common_.threads);
  if (t == 0) throw sw::ConfigError("--threads must be at least 1");
  return t;
}

std::uint64_t Resolver::seed() const { return pick<std::uint64_t>("--seed", "seed", common_.seed); }

std::string Resolver::dtype() const {
  const std::string d = pick<std::string>("--dtype", "dtype", common_.dtype);
  if (d != "f32" && d != "f64") throw sw::ConfigError("--dtype must be f32 or f64, got '" + d + "'");
  return d;
}

void echo_config(const std::string& command, const nlohmann::json& config) {
  nlohmann::json j = config;
  j["command"] = command;
  std::cerr << "effective config: " << j.dump() << '\n';
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw sw::ConfigError("expected a comma-separated list of non-negative integers, got '" + csv + "'");
    }
  }
  return out;
}

}  // namespace swhiten

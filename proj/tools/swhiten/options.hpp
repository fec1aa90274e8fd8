#pragma once

#include <cstdint>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sw/errors.hpp"
#include "sw/sw_config.hpp"

namespace swhiten {

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string dtype = "f64";
  std::string config_path;
  unsigned threads = 1;
};

struct SwFlags {
  std::string omega;
  std::string path;
  std::size_t group_size = 0;
  double eps = 0.0;
  double momentum = 0.0;
  int newton_iters = 0;
};

void add_common(CLI::App& cmd, CommonOptions& common);
void add_sw_flags(CLI::App& cmd, SwFlags& flags, const sw::SwConfig& defaults);

/// Flag values take precedence over the --config JSON, which takes precedence
/// over built-in defaults.
class Resolver {
 public:
  Resolver(const CLI::App& cmd, const CommonOptions& common);

  template <typename T>
  T pick(const std::string& flag, const std::string& key, const T& flag_value) const {
    if (cmd_.count(flag) > 0) return flag_value;
    if (file_.contains(key)) {
      try {
        return file_.at(key).get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw sw::ConfigError("config key '" + key + "': " + e.what());
      }
    }
    return flag_value;
  }

  /// True when the value comes from the flag or the config file.
  bool provided(const std::string& flag, const std::string& key) const {
    return cmd_.count(flag) > 0 || file_.contains(key);
  }

  sw::SwConfig sw_config(const SwFlags& flags, sw::SwConfig base) const;
  unsigned threads() const;
  std::uint64_t seed() const;
  /// "f32" or "f64"; anything else is a ConfigError.
  std::string dtype() const;

 private:
  const CLI::App& cmd_;
  const CommonOptions& common_;
  nlohmann::json file_ = nlohmann::json::object();
};

/// Prints "effective config: <json>" to stderr.
void echo_config(const std::string& command, const nlohmann::json& config);

std::vector<std::size_t> parse_size_list(const std::string& csv);

}  // namespace swhiten

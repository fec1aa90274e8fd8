#include "sw/sw_config.hpp"

#include <algorithm>

#include "sw/errors.hpp"

namespace sw {

SwConfig SwConfig::whitening_only() {
  SwConfig c;
  c.omega = {Method::BW, Method::IW};
  return c;
}

SwConfig SwConfig::full() {
  SwConfig c;
  c.omega = {Method::BW, Method::IW, Method::BN, Method::IN, Method::LN};
  return c;
}

void SwConfig::validate() const {
  if (omega.empty()) throw ConfigError("method set must not be empty");
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (std::find(omega.begin() + static_cast<std::ptrdiff_t>(i) + 1, omega.end(), omega[i]) != omega.end()) {
      throw ConfigError("method '" + std::string(to_string(omega[i])) + "' listed twice");
    }
  }
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw ConfigError("momentum must lie in [0, 1]");
  if (group_size == 0) throw ConfigError("group size must be positive");
  if (path.is_newton() && path.iterations < 1) throw ConfigError("Newton iteration count must be >= 1");
  if (!share_lambda_across_groups) throw ConfigError("per-group importance weights are not supported");
}

void SwConfig::validate_for(std::size_t channels) const {
  validate();
  if (group_size > channels || channels % group_size != 0) {
    throw ConfigError("group size " + std::to_string(group_size) + " must divide channel count " +
                      std::to_string(channels));
  }
}

int SwConfig::index_of(Method m) const noexcept {
  const auto it = std::find(omega.begin(), omega.end(), m);
  return it == omega.end() ? -1 : static_cast<int>(it - omega.begin());
}

std::vector<Method> parse_omega(std::string_view csv) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? csv.size() : comma;
    std::string_view token = csv.substr(start, end - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token.empty()) throw ConfigError("empty entry in method list '" + std::string(csv) + "'");
    out.push_back(parse_method(token));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string omega_to_string(const std::vector<Method>& omega) {
  std::string s;
  for (const Method m : omega) {
    if (!s.empty()) s += ',';
    s += to_string(m);
  }
  return s;
}

}  // namespace sw

#include "sw/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "sw/errors.hpp"
#include "sw/tensor_io.hpp"

namespace sw {
namespace {

constexpr std::string_view kCheckpointMagic = "SWCKPT01";
constexpr std::size_t kCheckpointMagicBytes = 16;

using nlohmann::json;

json config_json(const SwConfig& config) {
  json j;
  j["omega"] = json::array();
  for (const Method m : config.omega) j["omega"].push_back(std::string(to_string(m)));
  j["G"] = config.group_size;
  j["eps"] = config.eps;
  j["alpha"] = config.momentum;
  j["T"] = config.path.iterations;
  j["path"] = config.path.name();
  return j;
}

SwConfig apply_config_json(const json& j, SwConfig c) {
  try {
    if (j.contains("omega")) {
      const auto& o = j.at("omega");
      if (o.is_string()) {
        c.omega = parse_omega(o.get<std::string>());
      } else {
        c.omega.clear();
        for (const auto& m : o) c.omega.push_back(parse_method(m.get<std::string>()));
      }
    }
    if (j.contains("G")) c.group_size = j.at("G").get<std::size_t>();
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("alpha")) c.momentum = j.at("alpha").get<double>();
    const int t = j.contains("T") ? j.at("T").get<int>() : c.path.iterations;
    if (j.contains("path")) {
      c.path = parse_path(j.at("path").get<std::string>(), t);
    } else {
      c.path.iterations = t;
    }
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration value: ") + e.what());
  }
  return c;
}

template <typename T>
TensorRecord vector_record(const std::vector<T>& v, DType dtype) {
  return TensorRecord{{static_cast<std::uint32_t>(v.size())}, dtype, std::vector<double>(v.begin(), v.end())};
}

template <typename T>
TensorRecord matrix_record(const Matrix<T>& m, DType dtype) {
  return TensorRecord{{static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())},
                      dtype,
                      std::vector<double>(m.data().begin(), m.data().end())};
}

}  // namespace

std::string config_to_json(const SwConfig& config) { return config_json(config).dump(); }

SwConfig config_from_json(const std::string& text, SwConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  return apply_config_json(j, std::move(base));
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const SwState<T>& state, const SwConfig& config) {
  config.validate_for(state.channels());
  const DType dtype = sizeof(T) == 4 ? DType::F32 : DType::F64;

  json manifest = config_json(config);
  manifest["step_count"] = state.step_count;
  manifest["channels"] = state.channels();
  std::vector<std::string> fields{"lambda_mean", "lambda_cov", "gamma", "beta"};
  for (std::size_t g = 0; g < state.running_mean.size(); ++g) {
    fields.push_back("running_mean[" + std::to_string(g) + "]");
    fields.push_back("running_cov[" + std::to_string(g) + "]");
  }
  manifest["fields"] = fields;
  const std::string text = manifest.dump();

  std::vector<unsigned char> bytes(kCheckpointMagic.begin(), kCheckpointMagic.end());
  bytes.resize(kCheckpointMagicBytes, 0);
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<unsigned char>((len >> (8 * b)) & 0xFFu));
  bytes.insert(bytes.end(), text.begin(), text.end());

  append_tensor(bytes, vector_record(state.lambda_mean, dtype));
  append_tensor(bytes, vector_record(state.lambda_cov, dtype));
  append_tensor(bytes, vector_record(state.gamma, dtype));
  append_tensor(bytes, vector_record(state.beta, dtype));
  for (std::size_t g = 0; g < state.running_mean.size(); ++g) {
    append_tensor(bytes, vector_record(state.running_mean[g], dtype));
    append_tensor(bytes, matrix_record(state.running_cov[g].matrix(), dtype));
  }
  write_file_bytes(path, bytes);
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FileError("checkpoint not found: " + path.string());
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < kCheckpointMagicBytes + 4) throw FormatError("truncated checkpoint header", bytes.size());
  for (std::size_t i = 0; i < kCheckpointMagicBytes; ++i) {
    const unsigned char expected = i < kCheckpointMagic.size() ? static_cast<unsigned char>(kCheckpointMagic[i]) : 0;
    if (bytes[i] != expected) throw FormatError("bad checkpoint magic", i);
  }
  std::size_t pos = kCheckpointMagicBytes;
  std::uint32_t len = 0;
  for (int b = 0; b < 4; ++b) len |= static_cast<std::uint32_t>(bytes[pos + b]) << (8 * b);
  pos += 4;
  if (bytes.size() - pos < len) throw FormatError("truncated checkpoint manifest", bytes.size());

  json manifest;
  try {
    manifest = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                           bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("checkpoint manifest is not valid JSON: ") + e.what(), pos);
  }
  pos += len;

  Checkpoint<T> ck;
  std::size_t channels = 0;
  try {
    ck.config = apply_config_json(manifest, SwConfig{});
    ck.state.step_count = manifest.at("step_count").get<std::uint64_t>();
    channels = manifest.at("channels").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint manifest is incomplete: ") + e.what(), kCheckpointMagicBytes + 4);
  }
  ck.config.validate_for(channels);

  const auto next_vector = [&](std::size_t expected) {
    const std::size_t at = pos;
    TensorRecord rec = parse_tensor(bytes, pos);
    if (rec.dims.size() != 1 || rec.dims[0] != expected) throw FormatError("unexpected field shape", at);
    return std::vector<T>(rec.values.begin(), rec.values.end());
  };
  const std::size_t methods = ck.config.omega.size();
  ck.state.lambda_mean = next_vector(methods);
  ck.state.lambda_cov = next_vector(methods);
  ck.state.gamma = next_vector(channels);
  ck.state.beta = next_vector(channels);
  const std::size_t groups = ck.config.group_count(channels);
  const std::size_t gs = ck.config.group_size;
  for (std::size_t g = 0; g < groups; ++g) {
    ck.state.running_mean.push_back(next_vector(gs));
    const std::size_t at = pos;
    TensorRecord rec = parse_tensor(bytes, pos);
    if (rec.dims.size() != 2 || rec.dims[0] != gs || rec.dims[1] != gs) {
      throw FormatError("unexpected running covariance shape", at);
    }
    ck.state.running_cov.emplace_back(Matrix<T>(gs, gs, std::vector<T>(rec.values.begin(), rec.values.end())));
  }
  if (pos != bytes.size()) throw FormatError("trailing bytes after checkpoint", pos);
  return ck;
}

template void save_checkpoint(const std::filesystem::path&, const SwState<float>&, const SwConfig&);
template void save_checkpoint(const std::filesystem::path&, const SwState<double>&, const SwConfig&);
template Checkpoint<float> load_checkpoint(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint(const std::filesystem::path&);

}  // namespace sw

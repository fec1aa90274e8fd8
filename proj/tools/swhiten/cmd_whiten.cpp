#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include "commands.hpp"
#include "options.hpp"
#include "sw/checkpoint.hpp"
#include "sw/errors.hpp"
#include "sw/sw_layer.hpp"
#include "sw/tensor_io.hpp"

namespace swhiten {
namespace {

struct WhitenOptions {
  CommonOptions common;
  SwFlags sw;
  std::string input;
  std::string output;
  std::string mode = "train";
  std::string checkpoint;
  std::string checkpoint_out;
  std::string stats;
};

// Biased per-group covariance of y over all N * HW pixels, shape (groups, G, G).
template <typename T>
sw::TensorRecord output_covariance(const sw::Tensor4<T>& y, std::size_t group_size, sw::DType dtype) {
  const sw::Shape4 s = y.shape();
  const std::size_t groups = s.c / group_size;
  const std::size_t hw = s.pixels();
  const double count = static_cast<double>(s.n * hw);
  sw::TensorRecord rec;
  rec.dims = {static_cast<std::uint32_t>(groups), static_cast<std::uint32_t>(group_size),
              static_cast<std::uint32_t>(group_size)};
  rec.dtype = dtype;
  rec.values.assign(groups * group_size * group_size, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<double> mean(group_size, 0.0);
    for (std::size_t n = 0; n < s.n; ++n) {
      for (std::size_t i = 0; i < group_size; ++i) {
        for (const T v : y.plane(n, g * group_size + i)) mean[i] += static_cast<double>(v);
      }
    }
    for (auto& m : mean) m /= count;
    double* cov = rec.values.data() + g * group_size * group_size;
    for (std::size_t n = 0; n < s.n; ++n) {
      for (std::size_t i = 0; i < group_size; ++i) {
        const auto a = y.plane(n, g * group_size + i);
        for (std::size_t j = 0; j <= i; ++j) {
          const auto b = y.plane(n, g * group_size + j);
          double acc = 0.0;
          for (std::size_t p = 0; p < hw; ++p) {
            acc += (static_cast<double>(a[p]) - mean[i]) * (static_cast<double>(b[p]) - mean[j]);
          }
          cov[i * group_size + j] += acc;
        }
      }
    }
    for (std::size_t i = 0; i < group_size; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        cov[i * group_size + j] /= count;
        cov[j * group_size + i] = cov[i * group_size + j];
      }
    }
  }
  return rec;
}

template <typename T>
void whiten(const WhitenOptions& o, const sw::SwConfig& config, sw::DType dtype,
            const std::optional<sw::Checkpoint<T>>& ck) {
  const sw::Tensor4<T> x = sw::to_tensor4<T>(sw::load_tensor_file(o.input));
  config.validate_for(x.shape().c);
  sw::SwState<T> state = ck ? ck->state : sw::SwState<T>::fresh(config, x.shape().c);

  sw::Tensor4<T> y;
  if (o.mode == "train") {
    y = sw::forward_train(x, state, config).y;
  } else {
    y = sw::forward_eval(x, state, config);
  }
  sw::save_tensor_file(o.output, sw::to_record(y, dtype));
  if (!o.stats.empty()) sw::save_tensor_file(o.stats, output_covariance(y, config.group_size, dtype));
  if (!o.checkpoint_out.empty()) sw::save_checkpoint(o.checkpoint_out, state, config);
  std::cerr << "whiten: " << x.shape().to_string() << " -> " << o.output << " (" << o.mode << " mode, step "
            << state.step_count << ")\n";
}

template <typename T>
void run_typed(const WhitenOptions& o, const Resolver& r, const std::string& dtype_name) {
  std::optional<sw::Checkpoint<T>> ck;
  sw::SwConfig base;
  if (!o.checkpoint.empty()) {
    ck = sw::load_checkpoint<T>(o.checkpoint);
    base = ck->config;
  }
  const sw::SwConfig config = r.sw_config(o.sw, base);

  nlohmann::json echo = nlohmann::json::parse(sw::config_to_json(config));
  echo["mode"] = o.mode;
  echo["dtype"] = dtype_name;
  echo["input"] = o.input;
  echo["output"] = o.output;
  echo["checkpoint"] = o.checkpoint;
  echo["threads"] = config.threads;
  echo_config("whiten", echo);

  whiten<T>(o, config, dtype_name == "f32" ? sw::DType::F32 : sw::DType::F64, ck);
}

int run(const WhitenOptions& o, const CLI::App& cmd) {
  const Resolver r(cmd, o.common);
  if (o.mode != "train" && o.mode != "eval") throw sw::ConfigError("--mode must be train or eval");
  const std::string dtype = r.dtype();
  if (dtype == "f32") {
    run_typed<float>(o, r, dtype);
  } else {
    run_typed<double>(o, r, dtype);
  }
  return 0;
}

}  // namespace

void register_whiten(CLI::App& root, int& status) {
  auto opts = std::make_shared<WhitenOptions>();
  CLI::App* cmd = root.add_subcommand("whiten", "Apply a switchable whitening layer to a tensor file");
  add_common(*cmd, opts->common);
  add_sw_flags(*cmd, opts->sw, sw::SwConfig{});
  cmd->add_option("--input", opts->input, "Input tensor file")->required();
  cmd->add_option("--output", opts->output, "Output tensor file")->required();
  cmd->add_option("--mode", opts->mode, "train or eval")->capture_default_str();
  cmd->add_option("--checkpoint", opts->checkpoint, "Layer checkpoint to start from");
  cmd->add_option("--checkpoint-out", opts->checkpoint_out, "Write the layer state after the call");
  cmd->add_option("--stats", opts->stats, "Write the per-group output covariance (groups, G, G)");
  cmd->callback([opts, cmd, &status] { status = run(*opts, *cmd); });
}

}  // namespace swhiten

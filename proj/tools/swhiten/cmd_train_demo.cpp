#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "options.hpp"
#include "sw/checkpoint.hpp"
#include "sw/errors.hpp"
#include "sw/trainer.hpp"

namespace swhiten {
namespace {

struct TrainDemoOptions {
  CommonOptions common;
  SwFlags sw;
  double style = 0.0;
  std::size_t steps = 300;
  double lr = 0.3;
  double lr_importance = 0.0;
  std::size_t classes = 2;
  std::size_t samples = 512;
  std::size_t channels = 4;
  std::size_t size = 4;
  std::size_t hidden = 8;
  std::size_t batch = 64;
  std::string log;
  std::string save_dir;
};

int run(const TrainDemoOptions& o, const CLI::App& cmd) {
  const Resolver r(cmd, o.common);
  sw::TrainerConfig tc;
  tc.sw = r.sw_config(o.sw, sw::TrainerConfig::default_sw());
  tc.steps = r.pick<std::size_t>("--steps", "steps", o.steps);
  tc.lr = r.pick<double>("--lr", "lr", o.lr);
  if (r.provided("--lr-importance", "lr_importance")) {
    tc.lr_importance = r.pick<double>("--lr-importance", "lr_importance", o.lr_importance);
  }
  tc.hidden = r.pick<std::size_t>("--hidden", "hidden", o.hidden);
  tc.batch_size = r.pick<std::size_t>("--batch", "batch", o.batch);
  tc.seed = r.seed();

  sw::SyntheticSpec spec;
  spec.classes = r.pick<std::size_t>("--classes", "classes", o.classes);
  const std::size_t samples = r.pick<std::size_t>("--samples", "samples", o.samples);
  if (spec.classes == 0 || samples % spec.classes != 0) {
    throw sw::ConfigError("--samples must be a positive multiple of --classes");
  }
  spec.samples_per_class = samples / spec.classes;
  spec.channels = r.pick<std::size_t>("--channels", "channels", o.channels);
  spec.height = spec.width = r.pick<std::size_t>("--size", "size", o.size);
  spec.style_strength = r.pick<double>("--style", "style", o.style);
  spec.seed = tc.seed;
  if (r.dtype() != "f64") std::cerr << "note: train-demo always runs in f64\n";

  nlohmann::json echo = nlohmann::json::parse(sw::config_to_json(tc.sw));
  echo["style"] = spec.style_strength;
  echo["steps"] = tc.steps;
  echo["lr"] = tc.lr;
  echo["lr_importance"] = tc.lr_importance ? nlohmann::json(*tc.lr_importance) : nlohmann::json(nullptr);
  echo["classes"] = spec.classes;
  echo["samples"] = samples;
  echo["channels"] = spec.channels;
  echo["size"] = spec.height;
  echo["hidden"] = tc.hidden;
  echo["batch"] = tc.batch_size;
  echo["seed"] = tc.seed;
  echo["dtype"] = "f64";
  echo["threads"] = tc.sw.threads;
  echo_config("train-demo", echo);

  const sw::Dataset data = sw::generate_dataset(spec);
  const sw::TrainOutcome out = sw::train(data, tc);

  if (o.log.empty()) {
    out.log.write_csv(std::cout);
  } else {
    std::ofstream f(o.log);
    if (!f) throw sw::FileError("cannot write log: " + o.log);
    out.log.write_csv(f);
  }
  if (!o.save_dir.empty()) {
    std::filesystem::create_directories(o.save_dir);
    for (std::size_t l = 0; l < out.sw_states.size(); ++l) {
      const auto path = std::filesystem::path(o.save_dir) / ("sw_layer" + std::to_string(l) + ".ckpt");
      sw::save_checkpoint(path, out.sw_states[l], out.sw);
    }
  }

  std::cerr << "train-demo: final accuracy " << out.final_accuracy << ", final loss " << out.final_loss << '\n';
  for (const sw::Method m : out.sw.omega) {
    std::cerr << "  mean final omega[" << sw::to_string(m) << "] = " << out.mean_final_omega_mean(m)
              << ", omega'[" << sw::to_string(m) << "] = " << out.mean_final_omega_cov(m) << '\n';
  }
  return 0;
}

}  // namespace

void register_train_demo(CLI::App& root, int& status) {
  auto opts = std::make_shared<TrainDemoOptions>();
  CLI::App* cmd = root.add_subcommand("train-demo", "Train the toy network on synthetic styled data");
  add_common(*cmd, opts->common);
  add_sw_flags(*cmd, opts->sw, sw::TrainerConfig::default_sw());
  cmd->add_option("--style", opts->style, "Style strength")->capture_default_str();
  cmd->add_option("--steps", opts->steps, "SGD steps")->capture_default_str();
  cmd->add_option("--lr", opts->lr, "Learning rate")->capture_default_str();
  cmd->add_option("--lr-importance", opts->lr_importance, "Learning rate of the importance logits (default: --lr)");
  cmd->add_option("--classes", opts->classes, "Number of classes")->capture_default_str();
  cmd->add_option("--samples", opts->samples, "Total samples")->capture_default_str();
  cmd->add_option("--channels", opts->channels, "Input channels")->capture_default_str();
  cmd->add_option("--size", opts->size, "Spatial size (H = W)")->capture_default_str();
  cmd->add_option("--hidden", opts->hidden, "Channels of the SW stages")->capture_default_str();
  cmd->add_option("--batch", opts->batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--log", opts->log, "CSV log file (default: stdout)");
  cmd->add_option("--save-dir", opts->save_dir, "Directory for sw_layer<k>.ckpt checkpoints");
  cmd->callback([opts, cmd, &status] { status = run(*opts, *cmd); });
}

}  // namespace swhiten

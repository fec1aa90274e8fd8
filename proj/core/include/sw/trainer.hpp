#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sw/sw_config.hpp"
#include "sw/sw_layer.hpp"
#include "sw/synthetic.hpp"

namespace sw {

/// conv1x1 -> SW -> ReLU -> conv1x1 -> SW -> ReLU -> global average pool
/// -> linear -> softmax cross-entropy. Float64 throughout.
struct TrainerConfig {
  SwConfig sw = default_sw();
  std::size_t hidden = 8;  // channels of both SW stages
  std::size_t steps = 300;
  std::size_t batch_size = 64;
  double lr = 0.3;
  /// Learning rate for the importance logits; defaults to lr.
  std::optional<double> lr_importance;
  std::uint64_t seed = 0;

  static SwConfig default_sw();
  void validate(std::size_t input_channels) const;
};

struct TrainLogRow {
  std::size_t step = 0;
  /// Mini-batch loss before the update of this step. Empty on the step-0
  /// row, which records the initial importance weights.
  std::optional<double> loss;
  std::vector<std::vector<double>> omega_mean;  // [layer][method]
  std::vector<std::vector<double>> omega_cov;
};

struct TrainLog {
  std::vector<Method> methods;
  std::size_t layers = 0;
  std::vector<TrainLogRow> rows;

  /// step,loss,l0_omega_bw,...,l0_omegac_bw,...,l1_...
  void write_csv(std::ostream& out) const;
};

struct TrainOutcome {
  TrainLog log;
  std::vector<SwState<double>> sw_states;
  SwConfig sw;
  double final_loss = 0.0;     // full dataset, inference mode
  double final_accuracy = 0.0; // full dataset, inference mode

  /// Mean over layers of the covariance weight of `m`.
  double mean_final_omega_cov(Method m) const;
  double mean_final_omega_mean(Method m) const;
};

/// Throws TrainingDiverged when a loss or parameter becomes non-finite.
TrainOutcome train(const Dataset& data, const TrainerConfig& config);

}  // namespace sw

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "sw/errors.hpp"
#include "sw/trainer.hpp"

namespace {

sw::Dataset default_data(double style, std::uint64_t seed = 0) {
  sw::SyntheticSpec spec;
  spec.style_strength = style;
  spec.seed = seed;
  return sw::generate_dataset(spec);
}

double mean_loss(const sw::TrainLog& log, std::size_t from, std::size_t to) {
  double sum = 0.0;
  for (std::size_t k = from; k < to; ++k) sum += *log.rows[k].loss;
  return sum / static_cast<double>(to - from);
}

TEST(Trainer, DefaultRunLearns) {
  const auto out = sw::train(default_data(0.0), sw::TrainerConfig{});
  ASSERT_EQ(out.log.rows.size(), 301u);
  EXPECT_GE(out.final_accuracy, 0.95);
  EXPECT_LT(mean_loss(out.log, 291, 301), mean_loss(out.log, 1, 11));
}

TEST(Trainer, WeightsStartUniformAndStayOnSimplex) {
  sw::TrainerConfig tc;
  tc.steps = 50;
  const auto out = sw::train(default_data(1.0), tc);
  const auto& first = out.log.rows.front();
  EXPECT_FALSE(first.loss.has_value());
  for (const auto& w : first.omega_mean) {
    for (const double v : w) EXPECT_EQ(v, 0.5);
  }
  for (const auto& row : out.log.rows) {
    for (const auto* ws : {&row.omega_mean, &row.omega_cov}) {
      for (const auto& w : *ws) {
        double sum = 0.0;
        for (const double v : w) {
          EXPECT_GT(v, 0.0);
          EXPECT_LT(v, 1.0);
          sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(Trainer, ZeroLearningRateFreezesWeights) {
  sw::TrainerConfig tc;
  tc.steps = 20;
  tc.lr = 0.0;
  const auto out = sw::train(default_data(1.0), tc);
  for (const auto& row : out.log.rows) {
    for (const auto& w : row.omega_cov) {
      for (const double v : w) EXPECT_EQ(v, 0.5);
    }
  }
}

TEST(Trainer, FrozenImportanceStillConverges) {
  sw::TrainerConfig tc;
  tc.lr_importance = 0.0;
  const auto out = sw::train(default_data(0.0), tc);
  for (const auto& w : out.log.rows.back().omega_mean) EXPECT_EQ(w[0], 0.5);
  EXPECT_GE(out.final_accuracy, 0.95);
}

TEST(Trainer, Deterministic) {
  sw::TrainerConfig tc;
  tc.steps = 15;
  const auto a = sw::train(default_data(0.5), tc);
  const auto b = sw::train(default_data(0.5), tc);
  std::ostringstream sa;
  std::ostringstream sb;
  a.log.write_csv(sa);
  b.log.write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Trainer, CsvLayout) {
  sw::TrainerConfig tc;
  tc.steps = 2;
  const auto out = sw::train(default_data(0.0), tc);
  std::ostringstream os;
  out.log.write_csv(os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header,
            "step,loss,l0_omega_bw,l0_omega_iw,l0_omegacov_bw,l0_omegacov_iw,"
            "l1_omega_bw,l1_omega_iw,l1_omegacov_bw,l1_omegacov_iw");
  std::string row0;
  std::getline(is, row0);
  EXPECT_EQ(row0.rfind("0,,0.5,", 0), 0u);
}

TEST(Trainer, HugeLearningRateDiverges) {
  sw::TrainerConfig tc;
  tc.lr = 1e6;
  tc.steps = 50;
  EXPECT_THROW(sw::train(default_data(2.0), tc), sw::TrainingDiverged);
}

TEST(Trainer, InvalidConfig) {
  sw::TrainerConfig tc;
  tc.hidden = 6;  // not a multiple of G = 4
  EXPECT_THROW(sw::train(default_data(0.0), tc), sw::ConfigError);
  tc.hidden = 8;
  tc.lr = -1.0;
  EXPECT_THROW(sw::train(default_data(0.0), tc), sw::ConfigError);
}

TEST(Trainer, StyleShiftsCovarianceWeightTowardInstanceWhitening) {
  int agree = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    sw::TrainerConfig tc;
    tc.seed = seed;
    const double low = sw::train(default_data(0.0, seed), tc).mean_final_omega_cov(sw::Method::IW);
    const double high = sw::train(default_data(2.0, seed), tc).mean_final_omega_cov(sw::Method::IW);
    agree += high > low ? 1 : 0;
  }
  EXPECT_GE(agree, 2);
}

}  // namespace

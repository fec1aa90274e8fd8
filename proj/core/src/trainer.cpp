#include "sw/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sw/errors.hpp"

namespace sw {

SwConfig TrainerConfig::default_sw() {
  SwConfig c = SwConfig::whitening_only();
  c.group_size = 4;
  return c;
}

void TrainerConfig::validate(std::size_t input_channels) const {
  sw.validate_for(hidden);
  if (input_channels == 0) throw ConfigError("trainer: input has no channels");
  if (batch_size == 0) throw ConfigError("trainer: batch_size must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("trainer: lr must be finite and >= 0");
  if (lr_importance && (!(*lr_importance >= 0.0) || !std::isfinite(*lr_importance))) {
    throw ConfigError("trainer: lr_importance must be finite and >= 0");
  }
}

void TrainLog::write_csv(std::ostream& out) const {
  out << "step,loss";
  for (std::size_t l = 0; l < layers; ++l) {
    for (const Method m : methods) out << ",l" << l << "_omega_" << to_string(m);
    for (const Method m : methods) out << ",l" << l << "_omegacov_" << to_string(m);
  }
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& row : rows) {
    out << row.step << ',';
    if (row.loss) out << *row.loss;
    for (std::size_t l = 0; l < layers; ++l) {
      for (const double w : row.omega_mean[l]) out << ',' << w;
      for (const double w : row.omega_cov[l]) out << ',' << w;
    }
    out << '\n';
  }
  out.precision(old_precision);
}

double TrainOutcome::mean_final_omega_cov(Method m) const {
  const int k = sw.index_of(m);
  if (k < 0 || log.rows.empty()) return 0.0;
  const auto& last = log.rows.back();
  double sum = 0.0;
  for (const auto& w : last.omega_cov) sum += w[static_cast<std::size_t>(k)];
  return sum / static_cast<double>(last.omega_cov.size());
}

double TrainOutcome::mean_final_omega_mean(Method m) const {
  const int k = sw.index_of(m);
  if (k < 0 || log.rows.empty()) return 0.0;
  const auto& last = log.rows.back();
  double sum = 0.0;
  for (const auto& w : last.omega_mean) sum += w[static_cast<std::size_t>(k)];
  return sum / static_cast<double>(last.omega_mean.size());
}

namespace {

using Mat = Matrix<double>;
using Tensor = Tensor4<double>;

struct Params {
  Mat w1;  // hidden x in
  Mat w2;  // hidden x hidden
  Mat wf;  // classes x hidden
  std::vector<double> bf;
  std::vector<SwState<double>> sw;
};

Mat random_matrix(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Mat m(rows, cols);
  for (auto& v : m.data()) v = normal(rng);
  return m;
}

Tensor conv1x1(const Mat& w, const Tensor& x) {
  const Shape4 s = x.shape();
  Tensor y(Shape4{s.n, w.rows(), s.h, s.w});
  for (std::size_t n = 0; n < s.n; ++n) y.set_sample_block(n, 0, matmul(w, x.sample_block(n, 0, s.c)));
  return y;
}

// Accumulates dW and returns dx.
Tensor conv1x1_backward(const Mat& w, const Tensor& x, const Tensor& dy, Mat& dw) {
  const Shape4 s = x.shape();
  Tensor dx(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    const Mat g = dy.sample_block(n, 0, w.rows());
    dw += matmul_transposed(g, x.sample_block(n, 0, s.c));
    dx.set_sample_block(n, 0, transposed_matmul(w, g));
  }
  return dx;
}

void relu_inplace(Tensor& t) {
  for (auto& v : t.data()) v = std::max(v, 0.0);
}

struct Logits {
  Mat pooled;  // batch x hidden
  Mat probs;   // batch x classes
  double loss = 0.0;
  std::size_t correct = 0;
};

Logits head(const Params& p, const Tensor& a2, const std::vector<std::size_t>& labels) {
  const Shape4 s = a2.shape();
  Logits out;
  out.pooled = Mat(s.n, s.c);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const auto plane = a2.plane(n, c);
      out.pooled(n, c) = std::accumulate(plane.begin(), plane.end(), 0.0) / static_cast<double>(s.pixels());
    }
  }
  const std::size_t classes = p.wf.rows();
  out.probs = matmul_transposed(out.pooled, p.wf);
  for (std::size_t n = 0; n < s.n; ++n) {
    auto row = out.probs.row(n);
    for (std::size_t k = 0; k < classes; ++k) row[k] += p.bf[k];
    const double mx = *std::max_element(row.begin(), row.end());
    const auto argmax = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (argmax == labels[n]) ++out.correct;
    double z = 0.0;
    for (auto& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (auto& v : row) v /= z;
    out.loss -= std::log(std::max(row[labels[n]], 1e-300));
  }
  out.loss /= static_cast<double>(s.n);
  return out;
}

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const Params& p, const SwConfig& sw, const Dataset& data) {
  Tensor a1 = forward_eval(conv1x1(p.w1, data.x), p.sw[0], sw);
  relu_inplace(a1);
  Tensor a2 = forward_eval(conv1x1(p.w2, a1), p.sw[1], sw);
  relu_inplace(a2);
  const Logits l = head(p, a2, data.labels);
  return {l.loss, static_cast<double>(l.correct) / static_cast<double>(data.size())};
}

void sgd(std::span<double> w, std::span<const double> g, double lr) {
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
}

bool finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

TrainLogRow snapshot(std::size_t step, std::optional<double> loss, const Params& p) {
  TrainLogRow row;
  row.step = step;
  row.loss = loss;
  for (const auto& s : p.sw) {
    row.omega_mean.push_back(importance_weights<double>(s.lambda_mean));
    row.omega_cov.push_back(importance_weights<double>(s.lambda_cov));
  }
  return row;
}

TrainResult<double> guarded_forward(const Tensor& z, SwState<double>& state, const SwConfig& sw, std::size_t step) {
  try {
    return forward_train(z, state, sw);
  } catch (const NumericalFailure& e) {
    throw TrainingDiverged("whitening failed at step " + std::to_string(step) + ": " + e.what());
  }
}

}  // namespace

TrainOutcome train(const Dataset& data, const TrainerConfig& config) {
  const Shape4 in = data.x.shape();
  config.validate(in.c);
  if (data.size() == 0 || data.size() != in.n) throw InvalidInput("trainer: empty or inconsistent dataset");
  if (data.classes < 2) throw InvalidInput("trainer: dataset needs at least 2 classes");

  std::mt19937_64 rng(config.seed);
  const std::size_t hidden = config.hidden;
  Params p;
  p.w1 = random_matrix(hidden, in.c, std::sqrt(2.0 / static_cast<double>(in.c)), rng);
  p.w2 = random_matrix(hidden, hidden, std::sqrt(2.0 / static_cast<double>(hidden)), rng);
  p.wf = random_matrix(data.classes, hidden, std::sqrt(1.0 / static_cast<double>(hidden)), rng);
  p.bf.assign(data.classes, 0.0);
  p.sw = {SwState<double>::fresh(config.sw, hidden), SwState<double>::fresh(config.sw, hidden)};

  const double lr = config.lr;
  const double lr_imp = config.lr_importance.value_or(lr);
  const std::size_t batch = std::min(config.batch_size, data.size());

  TrainOutcome out;
  out.sw = config.sw;
  out.log.methods = config.sw.omega;
  out.log.layers = p.sw.size();
  out.log.rows.reserve(config.steps + 1);
  out.log.rows.push_back(snapshot(0, std::nullopt, p));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = data.size();

  for (std::size_t step = 1; step <= config.steps; ++step) {
    if (cursor + batch > data.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const Dataset mb = gather(data, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                                                              order.begin() + static_cast<std::ptrdiff_t>(cursor + batch)));
    cursor += batch;

    // Forward.
    const Tensor z1 = conv1x1(p.w1, mb.x);
    TrainResult<double> sw1 = guarded_forward(z1, p.sw[0], config.sw, step);
    Tensor a1 = sw1.y;
    relu_inplace(a1);
    const Tensor z2 = conv1x1(p.w2, a1);
    TrainResult<double> sw2 = guarded_forward(z2, p.sw[1], config.sw, step);
    Tensor a2 = sw2.y;
    relu_inplace(a2);
    const Logits logits = head(p, a2, mb.labels);
    if (!std::isfinite(logits.loss)) {
      throw TrainingDiverged("loss became non-finite at step " + std::to_string(step));
    }

    // Backward.
    const std::size_t classes = data.classes;
    Mat dlogits = logits.probs;
    for (std::size_t n = 0; n < batch; ++n) {
      dlogits(n, mb.labels[n]) -= 1.0;
    }
    dlogits *= 1.0 / static_cast<double>(batch);
    const Mat dwf = transposed_matmul(dlogits, logits.pooled);
    std::vector<double> dbf(classes, 0.0);
    for (std::size_t n = 0; n < batch; ++n) {
      for (std::size_t k = 0; k < classes; ++k) dbf[k] += dlogits(n, k);
    }
    const Mat dpooled = matmul(dlogits, p.wf);

    const Shape4 hs = a2.shape();
    const double inv_hw = 1.0 / static_cast<double>(hs.pixels());
    Tensor dy2(hs);
    for (std::size_t n = 0; n < hs.n; ++n) {
      for (std::size_t c = 0; c < hs.c; ++c) {
        const auto y = sw2.y.plane(n, c);
        auto d = dy2.plane(n, c);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = y[i] > 0.0 ? dpooled(n, c) * inv_hw : 0.0;
      }
    }
    const SwGradients<double> g2 = backward(dy2, sw2.cache, p.sw[1], config.sw);
    Mat dw2(hidden, hidden);
    Tensor dy1 = conv1x1_backward(p.w2, a1, g2.dx, dw2);
    {
      const auto y = sw1.y.data();
      auto d = dy1.data();
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(y[i] > 0.0)) d[i] = 0.0;
      }
    }
    const SwGradients<double> g1 = backward(dy1, sw1.cache, p.sw[0], config.sw);
    Mat dw1(hidden, in.c);
    conv1x1_backward(p.w1, mb.x, g1.dx, dw1);

    // Update.
    sgd(p.w1.data(), dw1.data(), lr);
    sgd(p.w2.data(), dw2.data(), lr);
    sgd(p.wf.data(), dwf.data(), lr);
    sgd(p.bf, dbf, lr);
    const SwGradients<double>* grads[] = {&g1, &g2};
    for (std::size_t l = 0; l < p.sw.size(); ++l) {
      sgd(p.sw[l].gamma, grads[l]->dgamma, lr);
      sgd(p.sw[l].beta, grads[l]->dbeta, lr);
      sgd(p.sw[l].lambda_mean, grads[l]->dlambda_mean, lr_imp);
      sgd(p.sw[l].lambda_cov, grads[l]->dlambda_cov, lr_imp);
      if (!finite(p.sw[l].lambda_mean) || !finite(p.sw[l].lambda_cov) || !finite(p.sw[l].gamma)) {
        throw TrainingDiverged("layer parameters became non-finite at step " + std::to_string(step));
      }
    }
    if (!finite(p.w1.data()) || !finite(p.w2.data()) || !finite(p.wf.data())) {
      throw TrainingDiverged("weights became non-finite at step " + std::to_string(step));
    }

    out.log.rows.push_back(snapshot(step, logits.loss, p));
  }

  const Evaluation final_eval = evaluate(p, config.sw, data);
  if (!std::isfinite(final_eval.loss)) throw TrainingDiverged("final loss is non-finite");
  out.final_loss = final_eval.loss;
  out.final_accuracy = final_eval.accuracy;
  out.sw_states = std::move(p.sw);
  return out;
}

}  // namespace sw

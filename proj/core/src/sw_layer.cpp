#include "sw/sw_layer.hpp"

#include <algorithm>
#include <cmath>

#include "sw/errors.hpp"
#include "sw/parallel.hpp"

namespace sw {

template <typename T>
SwState<T> SwState<T>::fresh(const SwConfig& config, std::size_t channels) {
  config.validate_for(channels);
  SwState s;
  s.lambda_mean.assign(config.omega.size(), T{1});
  s.lambda_cov.assign(config.omega.size(), T{1});
  s.gamma.assign(channels, T{1});
  s.beta.assign(channels, T{0});
  const std::size_t groups = config.group_count(channels);
  s.running_mean.assign(groups, std::vector<T>(config.group_size, T{0}));
  s.running_cov.assign(groups, SymMatrix<T>::identity(config.group_size));
  return s;
}

template <typename T>
std::vector<T> importance_weights(std::span<const T> lambda) {
  std::vector<T> w(lambda.size());
  if (lambda.empty()) return w;
  const T top = *std::max_element(lambda.begin(), lambda.end());
  T total{0};
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    w[k] = std::exp(lambda[k] - top);
    total += w[k];
  }
  for (auto& v : w) v /= total;
  return w;
}

template <typename T>
MixedMoments<T> mix_moments(std::span<const MomentPair<T>* const> per_method, std::span<const T> w_mean,
                            std::span<const T> w_cov) {
  if (per_method.empty()) throw ShapeError("mix_moments: no moments to mix");
  if (w_mean.size() != per_method.size() || w_cov.size() != per_method.size()) {
    throw ShapeError("mix_moments: weight count does not match method count");
  }
  const std::size_t c = per_method.front()->mean.size();
  MixedMoments<T> out{std::vector<T>(c, T{0}), {}};
  Matrix<T> cov(c, c);
  for (std::size_t k = 0; k < per_method.size(); ++k) {
    const MomentPair<T>& m = *per_method[k];
    if (m.mean.size() != c || m.cov.dim() != c) throw ShapeError("mix_moments: moment dimensions disagree");
    for (std::size_t i = 0; i < c; ++i) out.mean[i] += w_mean[k] * m.mean[i];
    cov += m.cov.matrix() * w_cov[k];
  }
  out.cov = SymMatrix<T>(std::move(cov));
  return out;
}

namespace {

template <typename T>
void check_state(const Shape4& shape, const SwState<T>& state, const SwConfig& config) {
  config.validate_for(shape.c);
  const std::size_t groups = config.group_count(shape.c);
  const bool ok = state.gamma.size() == shape.c && state.beta.size() == shape.c &&
                  state.lambda_mean.size() == config.omega.size() &&
                  state.lambda_cov.size() == config.omega.size() && state.running_mean.size() == groups &&
                  state.running_cov.size() == groups;
  if (!ok) throw ConfigError("layer state does not match input " + shape.to_string() + " and configuration");
  for (std::size_t g = 0; g < groups; ++g) {
    if (state.running_mean[g].size() != config.group_size || state.running_cov[g].dim() != config.group_size) {
      throw ConfigError("running buffers do not match group size " + std::to_string(config.group_size));
    }
  }
  if (shape.n == 0 || shape.pixels() == 0) throw ShapeError("empty input " + shape.to_string());
}

template <typename T>
const MomentPair<T>& moment_for(Method m, const GroupCache<T>& group, const SampleCache<T>& sample) {
  switch (m) {
    case Method::BW: return group.batch;
    case Method::BN: return *group.batch_diag;
    case Method::IW: return *sample.instance;
    case Method::IN: return *sample.instance_diag;
    case Method::LN: return *sample.layer;
  }
  throw ConfigError("unknown method");
}

template <typename T>
T weight_of(const std::vector<T>& weights, const SwConfig& config, Method m) {
  const int idx = config.index_of(m);
  return idx < 0 ? T{0} : weights[static_cast<std::size_t>(idx)];
}

template <typename T>
Tensor4<T> forward_impl(const Tensor4<T>& x, const SwState<T>& state, const SwConfig& config, bool training,
                        ForwardCache<T>& cache, std::vector<MomentPair<T>>* batch_out) {
  const Shape4& shape = x.shape();
  check_state(shape, state, config);
  if (!x.all_finite()) throw InvalidInput("switchable whitening: non-finite input");

  const std::size_t g_size = config.group_size;
  const std::size_t groups = config.group_count(shape.c);
  const T eps = static_cast<T>(config.eps);
  const bool need_instance =
      config.contains(Method::IW) || config.contains(Method::IN) || config.contains(Method::LN);

  cache.shape = shape;
  cache.weights_mean = importance_weights<T>(state.lambda_mean);
  cache.weights_cov = importance_weights<T>(state.lambda_cov);
  cache.groups.assign(groups, {});

  for (std::size_t g = 0; g < groups; ++g) {
    GroupCache<T>& gc = cache.groups[g];
    if (training) {
      Matrix<T> xb(g_size, shape.n * shape.pixels());
      for (std::size_t n = 0; n < shape.n; ++n) {
        for (std::size_t c = 0; c < g_size; ++c) {
          const auto src = x.plane(n, g * g_size + c);
          std::copy(src.begin(), src.end(), xb.row(c).begin() + static_cast<std::ptrdiff_t>(n * shape.pixels()));
        }
      }
      gc.batch = batch_moments(xb, eps);
      if (batch_out) batch_out->push_back(gc.batch);
    } else {
      Matrix<T> cov = state.running_cov[g].matrix();
      for (std::size_t i = 0; i < g_size; ++i) cov(i, i) += eps;
      gc.batch = MomentPair<T>{state.running_mean[g], SymMatrix<T>(std::move(cov)), shape.n * shape.pixels()};
    }
    if (config.contains(Method::BN)) gc.batch_diag = diagonalize(gc.batch);
    gc.samples.resize(shape.n);
  }

  Tensor4<T> y(shape);

  parallel_for(groups * shape.n, config.threads, [&](std::size_t task) {
    const std::size_t g = task / shape.n;
    const std::size_t n = task % shape.n;
    GroupCache<T>& gc = cache.groups[g];
    SampleCache<T>& sc = gc.samples[n];

    sc.input = x.sample_block(n, g * g_size, g_size);
    if (need_instance) sc.instance = instance_moments(sc.input, eps);
    if (config.contains(Method::IN)) sc.instance_diag = diagonalize(*sc.instance);
    if (config.contains(Method::LN)) sc.layer = layer_moments(*sc.instance, eps);

    std::vector<const MomentPair<T>*> per_method(config.omega.size());
    for (std::size_t k = 0; k < config.omega.size(); ++k) per_method[k] = &moment_for(config.omega[k], gc, sc);
    sc.mixed = mix_moments<T>(per_method, cache.weights_mean, cache.weights_cov);
    sc.centered = center<T>(sc.input, sc.mixed.mean);

    if (config.path.is_newton()) {
      NewtonResult<T> r = newton_inverse_sqrt(sc.mixed.cov, config.path.iterations);
      sc.whitening = std::move(r.inv_sqrt);
      sc.newton = std::move(r.stack);
    } else {
      ZcaResult<T> r = zca_inverse_sqrt(sc.mixed.cov);
      sc.whitening = std::move(r.inv_sqrt);
      sc.eig = std::move(r.eig);
    }
    sc.normalized = matmul(sc.whitening.matrix(), sc.centered);

    for (std::size_t c = 0; c < g_size; ++c) {
      const std::size_t ch = g * g_size + c;
      const auto src = sc.normalized.row(c);
      auto dst = y.plane(n, ch);
      for (std::size_t p = 0; p < src.size(); ++p) dst[p] = state.gamma[ch] * src[p] + state.beta[ch];
    }
  });
  return y;
}

}  // namespace

template <typename T>
TrainResult<T> forward_train(const Tensor4<T>& x, SwState<T>& state, const SwConfig& config) {
  TrainResult<T> out;
  std::vector<MomentPair<T>> batch;
  out.y = forward_impl(x, state, config, true, out.cache, &batch);

  const T alpha = static_cast<T>(config.momentum);
  const T eps = static_cast<T>(config.eps);
  for (std::size_t g = 0; g < batch.size(); ++g) {
    auto& mean = state.running_mean[g];
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] = (T{1} - alpha) * mean[i] + alpha * batch[g].mean[i];
    Matrix<T> raw = batch[g].cov.matrix();
    for (std::size_t i = 0; i < raw.rows(); ++i) raw(i, i) -= eps;
    state.running_cov[g] = SymMatrix<T>(state.running_cov[g].matrix() * (T{1} - alpha) + raw * alpha);
  }
  ++state.step_count;
  return out;
}

template <typename T>
Tensor4<T> forward_eval(const Tensor4<T>& x, const SwState<T>& state, const SwConfig& config) {
  ForwardCache<T> scratch;
  return forward_impl(x, state, config, false, scratch, static_cast<std::vector<MomentPair<T>>*>(nullptr));
}

template <typename T>
SwGradients<T> backward(const Tensor4<T>& dy, const ForwardCache<T>& cache, const SwState<T>& state,
                        const SwConfig& config) {
  if (cache.empty()) throw StateError("backward called without a forward_train cache");
  const Shape4& shape = cache.shape;
  if (!(dy.shape() == shape)) {
    throw StateError("upstream gradient " + dy.shape().to_string() + " does not match cached forward " +
                     shape.to_string());
  }
  check_state(shape, state, config);
  if (cache.groups.size() != config.group_count(shape.c)) throw StateError("cache grouping does not match config");

  const std::size_t g_size = config.group_size;
  const std::size_t groups = cache.groups.size();
  const std::size_t hw = shape.pixels();
  const std::size_t methods = config.omega.size();
  const auto& wm = cache.weights_mean;
  const auto& wc = cache.weights_cov;

  SwGradients<T> out;
  out.dx = Tensor4<T>(shape);
  out.dgamma.assign(shape.c, T{0});
  out.dbeta.assign(shape.c, T{0});
  out.dlambda_mean.assign(methods, T{0});
  out.dlambda_cov.assign(methods, T{0});

  // Affine.
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t n = 0; n < shape.n; ++n) {
      const Matrix<T>& xhat = cache.groups[g].samples[n].normalized;
      for (std::size_t c = 0; c < g_size; ++c) {
        const std::size_t ch = g * g_size + c;
        const auto up = dy.plane(n, ch);
        const auto xr = xhat.row(c);
        T sg{0};
        T sb{0};
        for (std::size_t p = 0; p < hw; ++p) {
          sg += up[p] * xr[p];
          sb += up[p];
        }
        out.dgamma[ch] += sg;
        out.dbeta[ch] += sb;
      }
    }
  }

  // Per-sample whitening backward.
  std::vector<WhitenGrads<T>> wg(groups * shape.n);
  parallel_for(groups * shape.n, config.threads, [&](std::size_t task) {
    const std::size_t g = task / shape.n;
    const std::size_t n = task % shape.n;
    const SampleCache<T>& sc = cache.groups[g].samples[n];
    Matrix<T> grad_xhat(g_size, hw);
    for (std::size_t c = 0; c < g_size; ++c) {
      const std::size_t ch = g * g_size + c;
      const auto up = dy.plane(n, ch);
      auto dst = grad_xhat.row(c);
      for (std::size_t p = 0; p < hw; ++p) dst[p] = state.gamma[ch] * up[p];
    }
    if (sc.newton) {
      wg[task] = newton_whiten_backward(grad_xhat, sc.centered, *sc.newton, sc.whitening);
    } else if (sc.eig) {
      wg[task] = zca_whiten_backward(grad_xhat, sc.centered, *sc.eig, sc.whitening);
    } else {
      throw StateError("cache holds neither an eigendecomposition nor a Newton stack");
    }
  });

  // Importance-weight gradients through the softmax Jacobian, written as
  // w_j * sum_k w_k (g_j - g_k) so coincident statistics cancel exactly.
  std::vector<T> g_mean(methods, T{0});
  std::vector<T> g_cov(methods, T{0});
  for (std::size_t g = 0; g < groups; ++g) {
    const GroupCache<T>& gc = cache.groups[g];
    for (std::size_t n = 0; n < shape.n; ++n) {
      const WhitenGrads<T>& w = wg[g * shape.n + n];
      for (std::size_t k = 0; k < methods; ++k) {
        const MomentPair<T>& m = moment_for(config.omega[k], gc, gc.samples[n]);
        T dot{0};
        for (std::size_t i = 0; i < g_size; ++i) dot += w.d_mean[i] * m.mean[i];
        g_mean[k] += dot;
        g_cov[k] += frobenius_inner(w.d_sigma, m.cov.matrix());
      }
    }
  }
  for (std::size_t j = 0; j < methods; ++j) {
    T am{0};
    T ac{0};
    for (std::size_t k = 0; k < methods; ++k) {
      am += wm[k] * (g_mean[j] - g_mean[k]);
      ac += wc[k] * (g_cov[j] - g_cov[k]);
    }
    out.dlambda_mean[j] = wm[j] * am;
    out.dlambda_cov[j] = wc[j] * ac;
  }

  // Input gradient: direct whitening term plus the paths through each
  // method's mean and covariance.
  const T w_bw = weight_of(wm, config, Method::BW), w_bn = weight_of(wm, config, Method::BN);
  const T w_iw = weight_of(wm, config, Method::IW), w_in = weight_of(wm, config, Method::IN);
  const T w_ln = weight_of(wm, config, Method::LN);
  const T v_bw = weight_of(wc, config, Method::BW), v_bn = weight_of(wc, config, Method::BN);
  const T v_iw = weight_of(wc, config, Method::IW), v_in = weight_of(wc, config, Method::IN);
  const T v_ln = weight_of(wc, config, Method::LN);

  const auto diagonal_of = [](const Matrix<T>& a) {
    Matrix<T> d(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) d(i, i) = a(i, i);
    return d;
  };

  for (std::size_t g = 0; g < groups; ++g) {
    const GroupCache<T>& gc = cache.groups[g];
    const T batch_pixels = static_cast<T>(shape.n * hw);

    std::vector<T> sum_dmean(g_size, T{0});
    Matrix<T> sum_dsigma(g_size, g_size);
    for (std::size_t n = 0; n < shape.n; ++n) {
      const WhitenGrads<T>& w = wg[g * shape.n + n];
      for (std::size_t i = 0; i < g_size; ++i) sum_dmean[i] += w.d_mean[i];
      sum_dsigma += w.d_sigma;
    }
    std::vector<T> batch_mean_grad(g_size);
    for (std::size_t i = 0; i < g_size; ++i) batch_mean_grad[i] = (w_bw + w_bn) * sum_dmean[i] / batch_pixels;
    Matrix<T> batch_cov_grad = sum_dsigma * v_bw + diagonal_of(sum_dsigma) * v_bn;
    batch_cov_grad *= T{2} / batch_pixels;
    const bool batch_active = (w_bw + w_bn) != T{0} || (v_bw + v_bn) != T{0};

    parallel_for(shape.n, config.threads, [&](std::size_t n) {
      const SampleCache<T>& sc = gc.samples[n];
      const WhitenGrads<T>& w = wg[g * shape.n + n];
      Matrix<T> dx = w.d_input;

      if (batch_active) {
        dx += matmul(batch_cov_grad, center<T>(sc.input, gc.batch.mean));
        for (std::size_t i = 0; i < g_size; ++i)
          for (auto& v : dx.row(i)) v += batch_mean_grad[i];
      }

      if (sc.instance) {
        const T inv_hw = T{1} / static_cast<T>(hw);
        Matrix<T> a = w.d_sigma * v_iw + diagonal_of(w.d_sigma) * v_in;
        a *= T{2} * inv_hw;
        dx += matmul(a, center<T>(sc.input, sc.instance->mean));
        for (std::size_t i = 0; i < g_size; ++i) {
          const T shift = (w_iw + w_in) * w.d_mean[i] * inv_hw;
          for (auto& v : dx.row(i)) v += shift;
        }
      }

      if (sc.layer) {
        const T count = static_cast<T>(g_size * hw);
        T dm{0};
        for (const T v : w.d_mean) dm += v;
        dm *= w_ln;
        const T ds = v_ln * trace(w.d_sigma);
        const T m = sc.layer->mean.front();
        for (std::size_t i = 0; i < g_size; ++i) {
          const auto xr = sc.input.row(i);
          auto dr = dx.row(i);
          for (std::size_t p = 0; p < hw; ++p) dr[p] += (dm + T{2} * (xr[p] - m) * ds) / count;
        }
      }

      out.dx.set_sample_block(n, g * g_size, dx);
    });
  }
  return out;
}

#define SW_INSTANTIATE_LAYER(T)                                                                                \
  template struct SwState<T>;                                                                                  \
  template std::vector<T> importance_weights(std::span<const T>);                                              \
  template MixedMoments<T> mix_moments(std::span<const MomentPair<T>* const>, std::span<const T>,              \
                                       std::span<const T>);                                                    \
  template TrainResult<T> forward_train(const Tensor4<T>&, SwState<T>&, const SwConfig&);                      \
  template Tensor4<T> forward_eval(const Tensor4<T>&, const SwState<T>&, const SwConfig&);                     \
  template SwGradients<T> backward(const Tensor4<T>&, const ForwardCache<T>&, const SwState<T>&,               \
                                   const SwConfig&);

SW_INSTANTIATE_LAYER(float)
SW_INSTANTIATE_LAYER(double)

#undef SW_INSTANTIATE_LAYER

}  // namespace sw

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sw/linalg.hpp"
#include "sw/stats.hpp"
#include "sw/sw_config.hpp"
#include "sw/tensor.hpp"
#include "sw/whitening.hpp"

namespace sw {

/// Learnable parameters and running statistics of one layer.
template <typename T>
struct SwState {
  std::vector<T> lambda_mean;  // one per method in omega
  std::vector<T> lambda_cov;
  std::vector<T> gamma;  // per channel
  std::vector<T> beta;
  std::vector<std::vector<T>> running_mean;  // per group
  /// Per-group running covariance, tracked without the eps regularizer;
  /// evaluation adds eps*I once.
  std::vector<SymMatrix<T>> running_cov;
  std::uint64_t step_count = 0;

  /// lambda = 1 for every method, gamma = 1, beta = 0, running mean 0,
  /// running covariance I.
  static SwState fresh(const SwConfig& config, std::size_t channels);

  std::size_t channels() const noexcept { return gamma.size(); }
};

/// Numerically stable softmax.
template <typename T>
std::vector<T> importance_weights(std::span<const T> lambda);

template <typename T>
struct MixedMoments {
  std::vector<T> mean;
  SymMatrix<T> cov;
};

/// sum_k w_mean[k] * mu_k and sum_k w_cov[k] * Sigma_k. Throws ShapeError
/// when the moments disagree in dimension or the weight counts differ.
template <typename T>
MixedMoments<T> mix_moments(std::span<const MomentPair<T>* const> per_method, std::span<const T> w_mean,
                            std::span<const T> w_cov);

template <typename T>
struct SampleCache {
  Matrix<T> input;     // X_n, C_g x HW
  Matrix<T> centered;  // X_n - mu_hat 1^T
  std::optional<MomentPair<T>> instance;
  std::optional<MomentPair<T>> instance_diag;
  std::optional<MomentPair<T>> layer;
  MixedMoments<T> mixed;
  SymMatrix<T> whitening;  // U_n
  std::optional<EigPair<T>> eig;
  std::optional<NewtonStack<T>> newton;
  Matrix<T> normalized;  // Xhat_n, before the affine
};

template <typename T>
struct GroupCache {
  MomentPair<T> batch;
  std::optional<MomentPair<T>> batch_diag;
  std::vector<SampleCache<T>> samples;
};

/// Intermediates of forward_train needed by backward.
template <typename T>
struct ForwardCache {
  Shape4 shape{};
  std::vector<T> weights_mean;
  std::vector<T> weights_cov;
  std::vector<GroupCache<T>> groups;

  bool empty() const noexcept { return groups.empty(); }
};

template <typename T>
struct TrainResult {
  Tensor4<T> y;
  ForwardCache<T> cache;
};

template <typename T>
struct SwGradients {
  Tensor4<T> dx;
  std::vector<T> dlambda_mean;
  std::vector<T> dlambda_cov;
  std::vector<T> dgamma;
  std::vector<T> dbeta;
};

/// Training-mode forward: batch statistics from x, running buffers updated
/// with momentum, full cache returned. Throws InvalidInput for non-finite x,
/// ConfigError for a state/config that does not match x, NumericalFailure
/// from the whitening kernels.
template <typename T>
TrainResult<T> forward_train(const Tensor4<T>& x, SwState<T>& state, const SwConfig& config);

/// Inference-mode forward: batch statistics replaced by the running buffers.
template <typename T>
Tensor4<T> forward_eval(const Tensor4<T>& x, const SwState<T>& state, const SwConfig& config);

/// Analytic backward for a matching forward_train call. Throws StateError
/// for an empty or mismatched cache and DegenerateSpectrum on the eigen path
/// when the mixed covariance has (nearly) repeated eigenvalues.
template <typename T>
SwGradients<T> backward(const Tensor4<T>& dy, const ForwardCache<T>& cache, const SwState<T>& state,
                        const SwConfig& config);

}  // namespace sw

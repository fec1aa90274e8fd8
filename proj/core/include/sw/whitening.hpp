#pragma once

#include <span>
#include <string>
#include <vector>

#include "sw/linalg.hpp"
#include "sw/matrix.hpp"

namespace sw {

/// How the inverse square root of a mixed covariance is computed.
struct WhiteningPath {
  enum class Kind { Eigen, Newton };

  Kind kind = Kind::Eigen;
  int iterations = 5;  // Newton only

  static WhiteningPath eigen() { return {Kind::Eigen, 5}; }
  static WhiteningPath newton(int t = 5) { return {Kind::Newton, t}; }

  bool is_newton() const noexcept { return kind == Kind::Newton; }
  std::string name() const { return is_newton() ? "newton" : "eigen"; }
  bool operator==(const WhiteningPath&) const = default;
};

/// Accepts "eigen" / "zca" / "svd" or "newton". Throws ConfigError.
WhiteningPath parse_path(const std::string& name, int iterations = 5);

template <typename T>
struct ZcaResult {
  SymMatrix<T> inv_sqrt;
  EigPair<T> eig;
};

/// Everything the Newton-Schulz forward produced, kept for reverse-mode
/// unrolling. iterates[0] is the identity, iterates[t] the final iterate.
template <typename T>
struct NewtonStack {
  SymMatrix<T> sigma_n;
  T trace_value{};
  std::vector<Matrix<T>> iterates;
};

template <typename T>
struct NewtonResult {
  SymMatrix<T> inv_sqrt;
  NewtonStack<T> stack;
};

/// D * Lambda^{-1/2} * D^T. Throws NumericalFailure naming the offending
/// eigenvalue when sigma is not positive definite.
template <typename T>
ZcaResult<T> zca_inverse_sqrt(const SymMatrix<T>& sigma);

/// Trace-normalized Newton-Schulz iteration
///   P_0 = I,  P_k = (3 P_{k-1} - P_{k-1}^3 Sigma_N) / 2,  Sigma_N = Sigma / tr(Sigma)
/// followed by the 1/sqrt(tr(Sigma)) rescale. Throws NumericalFailure if an
/// iterate's Frobenius norm exceeds 1e6 or becomes non-finite.
template <typename T>
NewtonResult<T> newton_inverse_sqrt(const SymMatrix<T>& sigma, int iterations);

/// inv_sqrt * (x_n - mean * 1^T)
template <typename T>
Matrix<T> whiten_apply(const Matrix<T>& x_n, std::span<const T> mean, const SymMatrix<T>& inv_sqrt);

/// Subtracts mean from every column.
template <typename T>
Matrix<T> center(const Matrix<T>& x_n, std::span<const T> mean);

/// Gradients of a loss through Xhat = U (X - mu 1^T) with U = Sigma^{-1/2}.
template <typename T>
struct WhitenGrads {
  Matrix<T> d_sigma;      // symmetric part of dL/dSigma
  std::vector<T> d_mean;  // dL/dmu
  Matrix<T> d_input;      // direct term U^T dL/dXhat
};

/// Relative spectral gap below which the eigen backward refuses to run.
inline constexpr double kDegenerateGapRelative = 1e-8;

/// Backward through the eigendecomposition, using the zero-diagonal
/// K_ij = 1 / (sigma_i - sigma_j) coupling matrix. Throws DegenerateSpectrum
/// when two eigenvalues are closer than kDegenerateGapRelative * max eigenvalue.
template <typename T>
WhitenGrads<T> zca_whiten_backward(const Matrix<T>& grad_out, const Matrix<T>& centered, const EigPair<T>& eig,
                                   const SymMatrix<T>& inv_sqrt);

/// Exact reverse-mode differentiation of the unrolled Newton-Schulz steps.
template <typename T>
WhitenGrads<T> newton_whiten_backward(const Matrix<T>& grad_out, const Matrix<T>& centered,
                                      const NewtonStack<T>& stack, const SymMatrix<T>& inv_sqrt);

}  // namespace sw

#include "sw/whitening.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sw/errors.hpp"

namespace sw {

WhiteningPath parse_path(const std::string& name, int iterations) {
  if (name == "eigen" || name == "zca" || name == "svd") return WhiteningPath::eigen();
  if (name == "newton" || name == "iterative") {
    if (iterations < 1) throw ConfigError("Newton iteration count must be >= 1");
    return WhiteningPath::newton(iterations);
  }
  throw ConfigError("unknown whitening path '" + name + "' (expected eigen or newton)");
}

template <typename T>
ZcaResult<T> zca_inverse_sqrt(const SymMatrix<T>& sigma) {
  EigPair<T> eig = sym_eig(sigma);
  for (const T v : eig.values) {
    if (!(v > T{0})) {
      std::ostringstream os;
      os << "zca_inverse_sqrt: covariance is not positive definite (eigenvalue " << v << ")";
      throw NumericalFailure(os.str());
    }
  }
  Matrix<T> inv = spectral_map(eig, [](T v) { return T{1} / std::sqrt(v); });
  return ZcaResult<T>{SymMatrix<T>(std::move(inv)), std::move(eig)};
}

template <typename T>
NewtonResult<T> newton_inverse_sqrt(const SymMatrix<T>& sigma, int iterations) {
  if (iterations < 1) throw ConfigError("newton_inverse_sqrt: iteration count must be >= 1");
  const T tr = trace(sigma.matrix());
  if (!(tr > T{0}) || !std::isfinite(tr)) {
    throw NumericalFailure("newton_inverse_sqrt: covariance trace is not positive");
  }
  const std::size_t n = sigma.dim();
  SymMatrix<T> sigma_n(sigma.matrix() * (T{1} / tr));

  std::vector<Matrix<T>> iterates;
  iterates.reserve(static_cast<std::size_t>(iterations) + 1);
  iterates.push_back(Matrix<T>::identity(n));
  for (int k = 1; k <= iterations; ++k) {
    const Matrix<T>& p = iterates.back();
    const Matrix<T> p3s = matmul(matmul(matmul(p, p), p), sigma_n.matrix());
    Matrix<T> next = p * T{3};
    next -= p3s;
    next *= T{0.5};
    const T norm = frobenius_norm(next);
    if (!std::isfinite(norm) || norm > T{1e6}) {
      throw NumericalFailure("newton_inverse_sqrt: iteration diverged at step " + std::to_string(k) +
                             " (ill-conditioned covariance)");
    }
    iterates.push_back(std::move(next));
  }
  SymMatrix<T> inv(iterates.back() * (T{1} / std::sqrt(tr)));
  return NewtonResult<T>{std::move(inv), NewtonStack<T>{std::move(sigma_n), tr, std::move(iterates)}};
}

template <typename T>
Matrix<T> center(const Matrix<T>& x_n, std::span<const T> mean) {
  if (mean.size() != x_n.rows()) throw ShapeError("center: mean length does not match channel count");
  Matrix<T> c = x_n;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (auto& v : c.row(i)) v -= mean[i];
  return c;
}

template <typename T>
Matrix<T> whiten_apply(const Matrix<T>& x_n, std::span<const T> mean, const SymMatrix<T>& inv_sqrt) {
  if (inv_sqrt.dim() != x_n.rows()) throw ShapeError("whiten_apply: whitening matrix does not match channel count");
  return matmul(inv_sqrt.matrix(), center(x_n, mean));
}

namespace {

// Shared tail of both backward paths: U^T G and -U^T G 1.
template <typename T>
void input_terms(const Matrix<T>& grad_out, const SymMatrix<T>& inv_sqrt, WhitenGrads<T>& out) {
  out.d_input = transposed_matmul(inv_sqrt.matrix(), grad_out);
  out.d_mean.assign(grad_out.rows(), T{0});
  for (std::size_t i = 0; i < out.d_input.rows(); ++i) {
    T acc{0};
    for (const T v : out.d_input.row(i)) acc += v;
    out.d_mean[i] = -acc;
  }
}

}  // namespace

template <typename T>
WhitenGrads<T> zca_whiten_backward(const Matrix<T>& grad_out, const Matrix<T>& centered, const EigPair<T>& eig,
                                   const SymMatrix<T>& inv_sqrt) {
  const std::size_t n = eig.values.size();
  const Matrix<T>& d = eig.vectors;

  const T top = *std::max_element(eig.values.begin(), eig.values.end());
  const T threshold = static_cast<T>(kDegenerateGapRelative) * top;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const T gap = eig.values[i] - eig.values[i + 1];
    if (gap < threshold) {
      throw DegenerateSpectrum("eigen backward: repeated eigenvalues in mixed covariance", static_cast<double>(gap),
                               static_cast<double>(threshold));
    }
  }

  std::vector<T> inv_root(n);
  for (std::size_t i = 0; i < n; ++i) inv_root[i] = T{1} / std::sqrt(eig.values[i]);

  // Xtilde = Lambda^{-1/2} D^T (X - mu 1^T)
  Matrix<T> x_tilde = transposed_matmul(d, centered);
  for (std::size_t i = 0; i < n; ++i)
    for (auto& v : x_tilde.row(i)) v *= inv_root[i];

  const Matrix<T> g_tilde = transposed_matmul(d, grad_out);  // D^T dL/dXhat
  const Matrix<T> g_v = matmul_transposed(g_tilde, centered);

  // dL/dLambda (diagonal) from V = Lambda^{-1/2} D^T.
  std::vector<T> g_lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    T acc{0};
    for (std::size_t j = 0; j < n; ++j) acc += g_v(i, j) * d(j, i);
    g_lambda[i] = T{-0.5} * inv_root[i] * inv_root[i] * inv_root[i] * acc;
  }

  // dL/dD = (dL/dV)^T Lambda^{-1/2} + dL/dXhat Xtilde^T
  Matrix<T> g_d = g_v.transpose();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g_d(i, j) *= inv_root[j];
  g_d += matmul_transposed(grad_out, x_tilde);

  // D { K^T o (D^T dL/dD) + diag(dL/dLambda) } D^T
  Matrix<T> inner = transposed_matmul(d, g_d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      inner(i, j) = i == j ? g_lambda[i] : inner(i, j) / (eig.values[j] - eig.values[i]);
    }
  }
  WhitenGrads<T> out;
  out.d_sigma = symmetric_part(matmul_transposed(matmul(d, inner), d));
  input_terms(grad_out, inv_sqrt, out);
  return out;
}

template <typename T>
WhitenGrads<T> newton_whiten_backward(const Matrix<T>& grad_out, const Matrix<T>& centered,
                                      const NewtonStack<T>& stack, const SymMatrix<T>& inv_sqrt) {
  const std::size_t n = inv_sqrt.dim();
  const T tr = stack.trace_value;
  const T r = T{1} / std::sqrt(tr);
  const Matrix<T>& s = stack.sigma_n.matrix();

  // Forward used U = sym(P_T) * r, so dL/dP_T = sym(dL/dU) * r.
  const Matrix<T> g_u = symmetric_part(matmul_transposed(grad_out, centered));
  T g_tr = frobenius_inner(g_u, inv_sqrt.matrix()) / r * (T{-0.5} * r * r * r);
  Matrix<T> g_p = g_u * r;
  Matrix<T> g_s(n, n);

  for (std::size_t k = stack.iterates.size() - 1; k >= 1; --k) {
    const Matrix<T>& p = stack.iterates[k - 1];
    const Matrix<T> p2 = matmul(p, p);
    const Matrix<T> p3 = matmul(p2, p);
    const Matrix<T> ps = matmul(p, s);
    const Matrix<T> p2s = matmul(p2, s);

    // P_k = 1.5 P - 0.5 P P P S
    Matrix<T> prev = g_p * T{1.5};
    Matrix<T> cubic = matmul_transposed(g_p, p2s);
    cubic += matmul_transposed(transposed_matmul(p, g_p), ps);
    cubic += matmul_transposed(transposed_matmul(p2, g_p), s);
    prev -= cubic * T{0.5};
    g_s -= transposed_matmul(p3, g_p) * T{0.5};
    g_p = std::move(prev);
  }

  // Sigma_N = Sigma / tr(Sigma)
  g_tr -= frobenius_inner(g_s, s) / tr;
  Matrix<T> g_sigma = g_s * (T{1} / tr);
  for (std::size_t i = 0; i < n; ++i) g_sigma(i, i) += g_tr;

  WhitenGrads<T> out;
  out.d_sigma = symmetric_part(g_sigma);
  input_terms(grad_out, inv_sqrt, out);
  return out;
}

#define SW_INSTANTIATE_WHITENING(T)                                                                         \
  template ZcaResult<T> zca_inverse_sqrt(const SymMatrix<T>&);                                              \
  template NewtonResult<T> newton_inverse_sqrt(const SymMatrix<T>&, int);                                   \
  template Matrix<T> whiten_apply(const Matrix<T>&, std::span<const T>, const SymMatrix<T>&);               \
  template Matrix<T> center(const Matrix<T>&, std::span<const T>);                                          \
  template WhitenGrads<T> zca_whiten_backward(const Matrix<T>&, const Matrix<T>&, const EigPair<T>&,        \
                                              const SymMatrix<T>&);                                         \
  template WhitenGrads<T> newton_whiten_backward(const Matrix<T>&, const Matrix<T>&, const NewtonStack<T>&, \
                                                 const SymMatrix<T>&);

SW_INSTANTIATE_WHITENING(float)
SW_INSTANTIATE_WHITENING(double)

#undef SW_INSTANTIATE_WHITENING

}  // namespace sw

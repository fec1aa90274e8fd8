#include "sw/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sw/errors.hpp"

namespace sw {
namespace {

template <typename T>
T off_diagonal_norm(const Matrix<T>& a) {
  T acc{0};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

// Zeroes a(p, q) with a rotation in the (p, q) plane; accumulates into v.
template <typename T>
void rotate(Matrix<T>& a, Matrix<T>& v, std::size_t p, std::size_t q) {
  const T apq = a(p, q);
  const T theta = (a(q, q) - a(p, p)) / (T{2} * apq);
  T t = T{1} / (std::abs(theta) + std::sqrt(theta * theta + T{1}));
  if (theta < T{0}) t = -t;
  const T c = T{1} / std::sqrt(t * t + T{1});
  const T s = t * c;
  const std::size_t n = a.rows();

  for (std::size_t k = 0; k < n; ++k) {
    const T akp = a(k, p);
    const T akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const T apk = a(p, k);
    const T aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = T{0};
  a(q, p) = T{0};

  for (std::size_t k = 0; k < n; ++k) {
    const T vkp = v(k, p);
    const T vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

template <typename T>
EigPair<T> sym_eig(const SymMatrix<T>& input, const JacobiOptions& options) {
  const std::size_t n = input.dim();
  if (n == 0) throw ShapeError("sym_eig: empty matrix");
  for (const T v : input.matrix().data()) {
    if (!std::isfinite(v)) throw InvalidInput("sym_eig: non-finite matrix entry");
  }

  Matrix<T> a = input.matrix();
  Matrix<T> v = Matrix<T>::identity(n);

  const T norm = frobenius_norm(a);
  const T rel_tol = std::max<T>(static_cast<T>(options.relative_tolerance),
                                T{8} * std::numeric_limits<T>::epsilon());
  const T tol = rel_tol * norm;

  bool converged = false;
  for (int sweep = 0; sweep <= options.max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= tol) {
      converged = true;
      break;
    }
    if (sweep == options.max_sweeps) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) != T{0}) rotate(a, v, p, q);
      }
    }
  }
  if (!converged) {
    throw NumericalFailure("sym_eig: Jacobi iteration did not converge within " +
                           std::to_string(options.max_sweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigPair<T> out{std::vector<T>(n), Matrix<T>(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a(src, src);
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(v(i, src)) > std::abs(v(pivot, src))) pivot = i;
    }
    const T sign = v(pivot, src) < T{0} ? T{-1} : T{1};
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = sign * v(i, src);
  }
  return out;
}

template EigPair<float> sym_eig(const SymMatrix<float>&, const JacobiOptions&);
template EigPair<double> sym_eig(const SymMatrix<double>&, const JacobiOptions&);

}  // namespace sw

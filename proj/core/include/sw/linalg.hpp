#pragma once

#include <vector>

#include "sw/matrix.hpp"

namespace sw {

/// Eigendecomposition of a symmetric matrix: A = vectors * diag(values) * vectors^T.
/// Values are sorted descending; column j of `vectors` pairs with values[j].
template <typename T>
struct EigPair {
  std::vector<T> values;
  Matrix<T> vectors;
};

struct JacobiOptions {
  /// Stop once the off-diagonal Frobenius norm falls below this fraction of
  /// the input norm. Clamped from below by a few ulps of the scalar type.
  double relative_tolerance = 1e-12;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigensolver.
///
/// Each eigenvector is sign-normalized so that its largest-magnitude component
/// is positive (lowest index wins ties); equal eigenvalues keep their input
/// order. The same input therefore always yields bit-identical output.
///
/// Throws InvalidInput on non-finite entries, NumericalFailure when the sweep
/// budget is exhausted.
template <typename T>
EigPair<T> sym_eig(const SymMatrix<T>& a, const JacobiOptions& options = {});

/// vectors * diag(f(values)) * vectors^T
template <typename T, typename F>
Matrix<T> spectral_map(const EigPair<T>& eig, F&& f) {
  const std::size_t n = eig.values.size();
  Matrix<T> scaled = eig.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    const T s = f(eig.values[j]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= s;
  }
  return matmul_transposed(scaled, eig.vectors);
}

}  // namespace sw

#include "sw/matrix.hpp"

#include <cmath>
#include <string>

#include "sw/errors.hpp"

namespace sw {
namespace {

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <typename T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + dims(a.rows(), a.cols()) + " vs " +
                     dims(b.rows(), b.cols()));
  }
}

}  // namespace

template <typename T>
Matrix<T>::Matrix(std::size_t rows, std::size_t cols, T fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

template <typename T>
Matrix<T>::Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: " + std::to_string(data_.size()) + " values for shape " + dims(rows, cols));
  }
}

template <typename T>
Matrix<T>::Matrix(std::initializer_list<std::initializer_list<T>> rows) : rows_(rows.size()) {
  cols_ = rows.size() == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

template <typename T>
Matrix<T> Matrix<T>::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
  return m;
}

template <typename T>
Matrix<T> Matrix<T>::diagonal(std::span<const T> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

template <typename T>
Matrix<T> Matrix<T>::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

template <typename T>
Matrix<T>& Matrix<T>::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

template <typename T>
Matrix<T>& Matrix<T>::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

template <typename T>
Matrix<T>& Matrix<T>::operator*=(T scale) noexcept {
  for (auto& v : data_) v *= scale;
  return *this;
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree " + dims(a.rows(), a.cols()) + " * " +
                     dims(b.rows(), b.cols()));
  }
  Matrix<T> c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T* out = c.data().data() + i * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      const T* brow = b.data().data() + k * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

template <typename T>
Matrix<T> matmul_transposed(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_transposed: inner dimensions disagree " + dims(a.rows(), a.cols()) + " * (" +
                     dims(b.rows(), b.cols()) + ")^T");
  }
  Matrix<T> c(a.rows(), b.rows());
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const T* arow = a.data().data() + i * inner;
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const T* brow = b.data().data() + j * inner;
      T acc{0};
      for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
      c(i, j) = acc;
    }
  }
  return c;
}

template <typename T>
Matrix<T> transposed_matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("transposed_matmul: inner dimensions disagree (" + dims(a.rows(), a.cols()) + ")^T * " +
                     dims(b.rows(), b.cols()));
  }
  Matrix<T> c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const T* brow = b.data().data() + k * n;
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const T aki = a(k, i);
      T* out = c.data().data() + i * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += aki * brow[j];
    }
  }
  return c;
}

template <typename T>
std::vector<T> matvec(const Matrix<T>& a, std::span<const T> x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec: " + dims(a.rows(), a.cols()) + " times vector of length " + std::to_string(x.size()));
  }
  std::vector<T> y(a.rows(), T{0});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T acc{0};
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

template <typename T>
T frobenius_inner(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "frobenius_inner");
  T acc{0};
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t k = 0; k < da.size(); ++k) acc += da[k] * db[k];
  return acc;
}

template <typename T>
T frobenius_norm(const Matrix<T>& a) {
  return std::sqrt(frobenius_inner(a, a));
}

template <typename T>
T trace(const Matrix<T>& a) {
  if (!a.is_square()) throw ShapeError("trace: non-square " + dims(a.rows(), a.cols()));
  T acc{0};
  for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, i);
  return acc;
}

template <typename T>
Matrix<T> hadamard(const Matrix<T>& a, const Matrix<T>& b) {
  require_same_shape(a, b, "hadamard");
  Matrix<T> c = a;
  auto dc = c.data();
  const auto db = b.data();
  for (std::size_t k = 0; k < dc.size(); ++k) dc[k] *= db[k];
  return c;
}

template <typename T>
Matrix<T> symmetric_part(const Matrix<T>& a) {
  if (!a.is_square()) throw ShapeError("symmetric_part: non-square " + dims(a.rows(), a.cols()));
  Matrix<T> s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    s(i, i) = a(i, i);
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const T v = (a(i, j) + a(j, i)) / T{2};
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

template <typename T>
SymMatrix<T>::SymMatrix(Matrix<T> a) : m_(symmetric_part(a)) {}

template <typename T>
SymMatrix<T>::SymMatrix(std::initializer_list<std::initializer_list<T>> rows) : SymMatrix(Matrix<T>(rows)) {}

template <typename T>
SymMatrix<T> SymMatrix<T>::identity(std::size_t n) {
  return SymMatrix(Matrix<T>::identity(n));
}

#define SW_INSTANTIATE_MATRIX(T)                                                   \
  template class Matrix<T>;                                                        \
  template class SymMatrix<T>;                                                     \
  template Matrix<T> matmul(const Matrix<T>&, const Matrix<T>&);                   \
  template Matrix<T> matmul_transposed(const Matrix<T>&, const Matrix<T>&);        \
  template Matrix<T> transposed_matmul(const Matrix<T>&, const Matrix<T>&);        \
  template std::vector<T> matvec(const Matrix<T>&, std::span<const T>);            \
  template T frobenius_inner(const Matrix<T>&, const Matrix<T>&);                  \
  template T frobenius_norm(const Matrix<T>&);                                     \
  template T trace(const Matrix<T>&);                                              \
  template Matrix<T> hadamard(const Matrix<T>&, const Matrix<T>&);                 \
  template Matrix<T> symmetric_part(const Matrix<T>&);

SW_INSTANTIATE_MATRIX(float)
SW_INSTANTIATE_MATRIX(double)

#undef SW_INSTANTIATE_MATRIX

}  // namespace sw

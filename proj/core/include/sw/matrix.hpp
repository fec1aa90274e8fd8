#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sw {

/// Dense row-major matrix. Used for group slices (C_g x pixels) and the
/// small C_g x C_g operands of the whitening kernels.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{0});
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data);
  Matrix(std::initializer_list<std::initializer_list<T>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const T> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  Matrix transpose() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(T scale) noexcept;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
Matrix<T> operator+(Matrix<T> a, const Matrix<T>& b) {
  a += b;
  return a;
}

template <typename T>
Matrix<T> operator-(Matrix<T> a, const Matrix<T>& b) {
  a -= b;
  return a;
}

template <typename T>
Matrix<T> operator*(Matrix<T> a, T scale) {
  a *= scale;
  return a;
}

template <typename T>
Matrix<T> operator*(T scale, Matrix<T> a) {
  a *= scale;
  return a;
}

/// Throws ShapeError when the inner dimensions disagree.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);

/// a * b^T without materializing the transpose.
template <typename T>
Matrix<T> matmul_transposed(const Matrix<T>& a, const Matrix<T>& b);

/// a^T * b without materializing the transpose.
template <typename T>
Matrix<T> transposed_matmul(const Matrix<T>& a, const Matrix<T>& b);

template <typename T>
std::vector<T> matvec(const Matrix<T>& a, std::span<const T> x);

template <typename T>
T frobenius_inner(const Matrix<T>& a, const Matrix<T>& b);

template <typename T>
T frobenius_norm(const Matrix<T>& a);

/// Sum of the diagonal. Throws ShapeError for non-square input.
template <typename T>
T trace(const Matrix<T>& a);

/// Elementwise product.
template <typename T>
Matrix<T> hadamard(const Matrix<T>& a, const Matrix<T>& b);

/// (A + A^T) / 2.
template <typename T>
Matrix<T> symmetric_part(const Matrix<T>& a);

/// Symmetric matrix. Construction always applies (A + A^T) / 2 so the stored
/// entries are exactly symmetric.
template <typename T>
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix<T> a);
  SymMatrix(std::initializer_list<std::initializer_list<T>> rows);

  static SymMatrix identity(std::size_t n);

  std::size_t dim() const noexcept { return m_.rows(); }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
  const Matrix<T>& matrix() const noexcept { return m_; }

 private:
  Matrix<T> m_;
};

}  // namespace sw

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sw/matrix.hpp"

namespace sw {

struct Shape4 {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t numel() const noexcept { return n * c * h * w; }
  std::size_t pixels() const noexcept { return h * w; }
  std::string to_string() const;
  bool operator==(const Shape4&) const = default;
};

/// Dense activation tensor in (N, C, H, W) layout, W fastest.
template <typename T>
class Tensor4 {
 public:
  using value_type = T;

  Tensor4() = default;
  explicit Tensor4(Shape4 shape, T fill = T{0});

  /// Validates the value count and rejects non-finite entries (InvalidInput).
  static Tensor4 from_data(Shape4 shape, std::vector<T> data);

  const Shape4& shape() const noexcept { return shape_; }
  std::size_t numel() const noexcept { return data_.size(); }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) noexcept { return data_[offset(n, c, h, w)]; }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return data_[offset(n, c, h, w)];
  }

  /// Contiguous H*W plane of one (sample, channel).
  std::span<T> plane(std::size_t n, std::size_t c) noexcept {
    return {data_.data() + offset(n, c, 0, 0), shape_.pixels()};
  }
  std::span<const T> plane(std::size_t n, std::size_t c) const noexcept {
    return {data_.data() + offset(n, c, 0, 0), shape_.pixels()};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }

  bool all_finite() const noexcept;

  /// Channels [c0, c0 + count) of sample n as a count x HW matrix.
  Matrix<T> sample_block(std::size_t n, std::size_t c0, std::size_t count) const;
  void set_sample_block(std::size_t n, std::size_t c0, const Matrix<T>& block);

  bool operator==(const Tensor4&) const = default;

 private:
  Shape4 shape_{};
  std::vector<T> data_;
};

/// Splits channels into consecutive groups of `group_size`. Requires
/// group_size | C (ConfigError otherwise, including group_size > C).
template <typename T>
std::vector<Tensor4<T>> split_groups(const Tensor4<T>& x, std::size_t group_size);

/// Inverse of split_groups.
template <typename T>
Tensor4<T> merge_groups(const std::vector<Tensor4<T>>& groups);

/// All N*H*W pixels of a single-group tensor as a C x (N*HW) matrix,
/// sample-major.
template <typename T>
Matrix<T> batch_matrix(const Tensor4<T>& group);

}  // namespace sw

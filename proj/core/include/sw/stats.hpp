#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sw/matrix.hpp"

namespace sw {

/// Statistic estimators a switchable whitening layer can mix over.
enum class Method { BW, IW, BN, IN, LN };

inline constexpr Method kAllMethods[] = {Method::BW, Method::IW, Method::BN, Method::IN, Method::LN};

std::string_view to_string(Method m);
/// Accepts "bw", "iw", "bn", "in", "ln" (case-insensitive). Throws ConfigError.
Method parse_method(std::string_view name);

/// True for methods whose statistics are pooled over the whole batch.
constexpr bool is_batch_method(Method m) { return m == Method::BW || m == Method::BN; }

/// Mean and covariance of one estimator over one channel group.
/// `cov` already includes the +eps*I regularizer.
template <typename T>
struct MomentPair {
  std::vector<T> mean;
  SymMatrix<T> cov;
  std::size_t pixel_count = 0;
};

/// Statistics over all columns of a C_g x (N*H*W) batch matrix.
/// Throws ShapeError for an empty batch, ConfigError for eps <= 0.
template <typename T>
MomentPair<T> batch_moments(const Matrix<T>& x, T eps);

/// Statistics of a single sample's C_g x HW slice.
template <typename T>
MomentPair<T> instance_moments(const Matrix<T>& x_n, T eps);

/// Keeps the mean and the covariance diagonal; zeroes the off-diagonal.
template <typename T>
MomentPair<T> diagonalize(const MomentPair<T>& m);

/// Layer statistics (one mean and one variance over every value of the
/// sample's group) recovered from its instance moments through the law of
/// total variance. `eps` must be the value the instance moments were built
/// with; it is removed from the diagonal before pooling and added back once.
template <typename T>
MomentPair<T> layer_moments(const MomentPair<T>& instance, T eps);

}  // namespace sw

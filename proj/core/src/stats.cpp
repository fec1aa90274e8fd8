#include "sw/stats.hpp"

#include <algorithm>
#include <cctype>

#include "sw/errors.hpp"

namespace sw {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::BW: return "bw";
    case Method::IW: return "iw";
    case Method::BN: return "bn";
    case Method::IN: return "in";
    case Method::LN: return "ln";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (const Method m : kAllMethods) {
    if (lower == to_string(m)) return m;
  }
  throw ConfigError("unknown normalization method '" + std::string(name) + "' (expected bw, iw, bn, in or ln)");
}

namespace {

template <typename T>
MomentPair<T> moments(const Matrix<T>& x, T eps, const char* who) {
  if (x.cols() == 0 || x.rows() == 0) throw ShapeError(std::string(who) + ": empty input");
  if (!(eps > T{0})) throw ConfigError(std::string(who) + ": eps must be positive");
  const std::size_t c = x.rows();
  const std::size_t p = x.cols();
  const T inv = T{1} / static_cast<T>(p);

  std::vector<T> mean(c, T{0});
  for (std::size_t i = 0; i < c; ++i) {
    T acc{0};
    for (const T v : x.row(i)) acc += v;
    mean[i] = acc * inv;
  }

  Matrix<T> centered = x;
  for (std::size_t i = 0; i < c; ++i)
    for (auto& v : centered.row(i)) v -= mean[i];

  Matrix<T> cov = matmul_transposed(centered, centered);
  cov *= inv;
  for (std::size_t i = 0; i < c; ++i) cov(i, i) += eps;
  return MomentPair<T>{std::move(mean), SymMatrix<T>(std::move(cov)), p};
}

}  // namespace

template <typename T>
MomentPair<T> batch_moments(const Matrix<T>& x, T eps) {
  return moments(x, eps, "batch_moments");
}

template <typename T>
MomentPair<T> instance_moments(const Matrix<T>& x_n, T eps) {
  return moments(x_n, eps, "instance_moments");
}

template <typename T>
MomentPair<T> diagonalize(const MomentPair<T>& m) {
  const std::size_t c = m.mean.size();
  Matrix<T> d(c, c);
  for (std::size_t i = 0; i < c; ++i) d(i, i) = m.cov(i, i);
  return MomentPair<T>{m.mean, SymMatrix<T>(std::move(d)), m.pixel_count};
}

template <typename T>
MomentPair<T> layer_moments(const MomentPair<T>& instance, T eps) {
  const std::size_t c = instance.mean.size();
  if (c == 0) throw ShapeError("layer_moments: empty moments");
  const T inv_c = T{1} / static_cast<T>(c);

  T mu{0};
  for (const T v : instance.mean) mu += v;
  mu *= inv_c;

  T within{0};
  T between{0};
  for (std::size_t i = 0; i < c; ++i) {
    within += instance.cov(i, i) - eps;
    const T d = instance.mean[i] - mu;
    between += d * d;
  }
  const T variance = (within + between) * inv_c + eps;

  Matrix<T> cov(c, c);
  for (std::size_t i = 0; i < c; ++i) cov(i, i) = variance;
  return MomentPair<T>{std::vector<T>(c, mu), SymMatrix<T>(std::move(cov)), instance.pixel_count * c};
}

#define SW_INSTANTIATE_STATS(T)                                        \
  template MomentPair<T> batch_moments(const Matrix<T>&, T);           \
  template MomentPair<T> instance_moments(const Matrix<T>&, T);        \
  template MomentPair<T> diagonalize(const MomentPair<T>&);            \
  template MomentPair<T> layer_moments(const MomentPair<T>&, T);

SW_INSTANTIATE_STATS(float)
SW_INSTANTIATE_STATS(double)

#undef SW_INSTANTIATE_STATS

}  // namespace sw

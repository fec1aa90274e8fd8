#include "sw/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "sw/errors.hpp"

namespace sw {

std::string Shape4::to_string() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
}

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape, T fill) : shape_(shape), data_(shape.numel(), fill) {}

template <typename T>
Tensor4<T> Tensor4<T>::from_data(Shape4 shape, std::vector<T> data) {
  if (data.size() != shape.numel()) {
    throw ShapeError("Tensor4: " + std::to_string(data.size()) + " values for shape " + shape.to_string());
  }
  Tensor4 t;
  t.shape_ = shape;
  t.data_ = std::move(data);
  if (!t.all_finite()) throw InvalidInput("Tensor4: non-finite value in input data");
  return t;
}

template <typename T>
bool Tensor4<T>::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
Matrix<T> Tensor4<T>::sample_block(std::size_t n, std::size_t c0, std::size_t count) const {
  const std::size_t hw = shape_.pixels();
  Matrix<T> m(count, hw);
  for (std::size_t c = 0; c < count; ++c) {
    const auto src = plane(n, c0 + c);
    std::copy(src.begin(), src.end(), m.row(c).begin());
  }
  return m;
}

template <typename T>
void Tensor4<T>::set_sample_block(std::size_t n, std::size_t c0, const Matrix<T>& block) {
  if (block.cols() != shape_.pixels() || c0 + block.rows() > shape_.c) {
    throw ShapeError("set_sample_block: block does not fit tensor " + shape_.to_string());
  }
  for (std::size_t c = 0; c < block.rows(); ++c) {
    const auto src = block.row(c);
    std::copy(src.begin(), src.end(), plane(n, c0 + c).begin());
  }
}

template <typename T>
std::vector<Tensor4<T>> split_groups(const Tensor4<T>& x, std::size_t group_size) {
  const Shape4& s = x.shape();
  if (group_size == 0 || group_size > s.c || s.c % group_size != 0) {
    throw ConfigError("split_groups: group size " + std::to_string(group_size) + " must divide channel count " +
                      std::to_string(s.c));
  }
  const std::size_t groups = s.c / group_size;
  std::vector<Tensor4<T>> out;
  out.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    Tensor4<T> part(Shape4{s.n, group_size, s.h, s.w});
    for (std::size_t n = 0; n < s.n; ++n) {
      for (std::size_t c = 0; c < group_size; ++c) {
        const auto src = x.plane(n, g * group_size + c);
        std::copy(src.begin(), src.end(), part.plane(n, c).begin());
      }
    }
    out.push_back(std::move(part));
  }
  return out;
}

template <typename T>
Tensor4<T> merge_groups(const std::vector<Tensor4<T>>& groups) {
  if (groups.empty()) throw ShapeError("merge_groups: no groups");
  const Shape4 g0 = groups.front().shape();
  for (const auto& g : groups) {
    if (!(g.shape() == g0)) throw ShapeError("merge_groups: groups have different shapes");
  }
  Tensor4<T> out(Shape4{g0.n, g0.c * groups.size(), g0.h, g0.w});
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (std::size_t n = 0; n < g0.n; ++n) {
      for (std::size_t c = 0; c < g0.c; ++c) {
        const auto src = groups[gi].plane(n, c);
        std::copy(src.begin(), src.end(), out.plane(n, gi * g0.c + c).begin());
      }
    }
  }
  return out;
}

template <typename T>
Matrix<T> batch_matrix(const Tensor4<T>& group) {
  const Shape4& s = group.shape();
  const std::size_t hw = s.pixels();
  Matrix<T> m(s.c, s.n * hw);
  for (std::size_t c = 0; c < s.c; ++c) {
    auto dst = m.row(c);
    for (std::size_t n = 0; n < s.n; ++n) {
      const auto src = group.plane(n, c);
      std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(n * hw));
    }
  }
  return m;
}

#define SW_INSTANTIATE_TENSOR(T)                                                    \
  template class Tensor4<T>;                                                        \
  template std::vector<Tensor4<T>> split_groups(const Tensor4<T>&, std::size_t);    \
  template Tensor4<T> merge_groups(const std::vector<Tensor4<T>>&);                 \
  template Matrix<T> batch_matrix(const Tensor4<T>&);

SW_INSTANTIATE_TENSOR(float)
SW_INSTANTIATE_TENSOR(double)

#undef SW_INSTANTIATE_TENSOR

}  // namespace sw

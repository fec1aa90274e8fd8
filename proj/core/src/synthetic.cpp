#include "sw/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sw/errors.hpp"

namespace sw {

void SyntheticSpec::validate() const {
  if (classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
  if (samples_per_class == 0 || channels == 0 || height == 0 || width == 0) {
    throw ConfigError("synthetic data dimensions must be positive");
  }
  if (!(style_strength >= 0.0) || !std::isfinite(style_strength)) {
    throw ConfigError("style_strength must be finite and >= 0");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("noise must be finite and >= 0");
}

Dataset generate_dataset(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t pixels = spec.height * spec.width;
  const std::size_t plane_block = spec.channels * pixels;
  std::vector<std::vector<double>> prototypes(spec.classes, std::vector<double>(plane_block));
  for (auto& proto : prototypes) {
    for (auto& v : proto) v = normal(rng);
  }

  const std::size_t total = spec.classes * spec.samples_per_class;
  Dataset out;
  out.classes = spec.classes;
  out.x = Tensor4<double>(Shape4{total, spec.channels, spec.height, spec.width});
  out.labels.resize(total);

  const double s = spec.style_strength;
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t label = i % spec.classes;
    out.labels[i] = label;
    const auto& proto = prototypes[label];
    for (std::size_t c = 0; c < spec.channels; ++c) {
      const double scale = std::exp(0.5 * s * normal(rng));
      const double shift = s * normal(rng);
      auto plane = out.x.plane(i, c);
      for (std::size_t p = 0; p < pixels; ++p) {
        plane[p] = scale * proto[c * pixels + p] + shift + spec.noise * normal(rng);
      }
    }
  }
  return out;
}

Dataset gather(const Dataset& data, const std::vector<std::size_t>& indices) {
  const Shape4 src = data.x.shape();
  Dataset out;
  out.classes = data.classes;
  out.x = Tensor4<double>(Shape4{indices.size(), src.c, src.h, src.w});
  out.labels.reserve(indices.size());
  const std::size_t block = src.c * src.pixels();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= data.size()) throw InvalidInput("gather: sample index out of range");
    const auto from = data.x.data().subspan(i * block, block);
    std::copy(from.begin(), from.end(), out.x.data().begin() + static_cast<std::ptrdiff_t>(k * block));
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

}  // namespace sw

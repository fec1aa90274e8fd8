#include <random>

#include <benchmark/benchmark.h>

#include "sw/sw_layer.hpp"

namespace {

sw::Tensor4<double> random_input(sw::Shape4 shape) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  sw::Tensor4<double> x(shape);
  for (auto& v : x.data()) v = normal(rng);
  return x;
}

sw::SwConfig config_for(std::int64_t path, std::int64_t full) {
  sw::SwConfig c = full != 0 ? sw::SwConfig::full() : sw::SwConfig::whitening_only();
  c.path = path == 0 ? sw::WhiteningPath::eigen() : sw::WhiteningPath::newton(5);
  return c;
}

// Args: path (0 eigen, 1 newton), full omega flag, N, C, HW side.
void BM_ForwardTrain(benchmark::State& state) {
  const sw::SwConfig config = config_for(state.range(0), state.range(1));
  const auto side = static_cast<std::size_t>(state.range(4));
  const sw::Shape4 shape{static_cast<std::size_t>(state.range(2)), static_cast<std::size_t>(state.range(3)), side,
                         side};
  const auto x = random_input(shape);
  auto s = sw::SwState<double>::fresh(config, shape.c);
  for (auto _ : state) benchmark::DoNotOptimize(sw::forward_train(x, s, config));
}
BENCHMARK(BM_ForwardTrain)
    ->ArgsProduct({{0, 1}, {0, 1}, {8}, {64}, {8}})
    ->Args({0, 0, 4, 256, 8})
    ->Args({1, 0, 4, 256, 8})
    ->Unit(benchmark::kMillisecond);

void BM_ForwardEval(benchmark::State& state) {
  const sw::SwConfig config = config_for(state.range(0), 0);
  const sw::Shape4 shape{8, 64, 8, 8};
  const auto x = random_input(shape);
  const auto s = sw::SwState<double>::fresh(config, shape.c);
  for (auto _ : state) benchmark::DoNotOptimize(sw::forward_eval(x, s, config));
}
BENCHMARK(BM_ForwardEval)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Backward(benchmark::State& state) {
  const sw::SwConfig config = config_for(state.range(0), state.range(1));
  const sw::Shape4 shape{8, 64, 8, 8};
  const auto x = random_input(shape);
  auto s = sw::SwState<double>::fresh(config, shape.c);
  const auto fwd = sw::forward_train(x, s, config);
  const auto dy = random_input(shape);
  for (auto _ : state) benchmark::DoNotOptimize(sw::backward(dy, fwd.cache, s, config));
}
BENCHMARK(BM_Backward)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

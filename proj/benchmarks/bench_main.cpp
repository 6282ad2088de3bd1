#include <benchmark/benchmark.h>

#include "imuon/lmo.hpp"
#include "imuon/polar.hpp"
#include "imuon/random.hpp"
#include "imuon/svd.hpp"

using namespace imuon;

namespace {

Tensor sample(benchmark::State& st) {
  Rng rng = make_rng(7);
  return random_gaussian(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)), rng);
}

void BM_JacobiSvd(benchmark::State& st) {
  const Tensor g = sample(st);
  for (auto _ : st) benchmark::DoNotOptimize(singular_values(g));
}

void BM_NewtonSchulz5(benchmark::State& st) {
  const Tensor g = sample(st);
  const auto s = newton_schulz(5);
  for (auto _ : st) benchmark::DoNotOptimize(approx_polar(g, s));
}

void BM_PolarExpress5(benchmark::State& st) {
  const Tensor g = sample(st);
  const auto s = polar_express(5);
  for (auto _ : st) benchmark::DoNotOptimize(approx_polar(g, s));
}

void BM_ExactLmo(benchmark::State& st) {
  const Tensor g = sample(st);
  for (auto _ : st) benchmark::DoNotOptimize(lmo_spectral_exact(g));
}

}  // namespace

#define SHAPES ->Args({16, 16})->Args({64, 48})->Args({128, 128})
BENCHMARK(BM_JacobiSvd) SHAPES;
BENCHMARK(BM_NewtonSchulz5) SHAPES;
BENCHMARK(BM_PolarExpress5) SHAPES;
BENCHMARK(BM_ExactLmo) SHAPES;
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "scorelab/scorematch.hpp"
#include "scorelab/stein.hpp"
#include "scorelab/svgd.hpp"

using namespace scorelab;

static void BM_MixtureScore(benchmark::State& state) {
  const auto m = GaussianMixture1D::two_component(0.3, -4.0, 4.0, 1.0);
  double x = -6.0, acc = 0.0;
  for (auto _ : state) {
    acc += m.score(x);
    x = x > 6.0 ? -6.0 : x + 1e-3;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_MixtureScore);

static void BM_FisherQuadrature(benchmark::State& state) {
  const auto p = GaussianMixture1D::two_component(0.5, -5.0, 5.0, 1.0);
  const auto pp = GaussianMixture1D::two_component(0.9, -5.0, 5.0, 1.0);
  const auto w = default_window(p, pp, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fisher_divergence(p, pp, w).value());
}
BENCHMARK(BM_FisherQuadrature)->Arg(1025)->Arg(4097)->Arg(16385);

static void BM_Ksd(benchmark::State& state) {
  const auto p = GaussianMixture1D::gaussian(0.0, 1.0);
  auto rng = make_stream(1, 0);
  const auto xs = sample(p, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(ksd_vstat(xs, p, KernelSpec(1.0)).value());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Ksd)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oNSquared);

static void BM_SvgdDirection(benchmark::State& state) {
  const auto p = GaussianMixture1D::two_component(0.5, -4.0, 4.0, 1.0);
  auto rng = make_stream(2, 0);
  const auto e = gaussian_ensemble(static_cast<std::size_t>(state.range(0)), 0.0, 3.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(svgd_direction(e, p, KernelSpec(1.0)).data());
}
BENCHMARK(BM_SvgdDirection)->Arg(200)->Arg(1000);

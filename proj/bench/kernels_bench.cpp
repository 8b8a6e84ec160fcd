// Serial reference kernels against their OpenMP counterparts.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "umfpt/hierarchy.hpp"
#include "umfpt/kernels.hpp"
#include "umfpt/params.hpp"

namespace {

using namespace umfpt;

std::vector<double> ramp(std::size_t n, double scale) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(-scale * static_cast<double>(i) / n);
  return v;
}

template <auto Kernel>
void BM_exp_series(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto lambda = ramp(200, 40.0);
  const auto c = ramp(200, 3.0);
  const auto t = ramp(n, 1.0);
  std::vector<double> out(n);
  for (auto _ : state) {
    Kernel(lambda, c, t, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * 200);
}

template <auto Kernel>
void BM_convolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = ramp(n, 5.0);
  const auto b = ramp(n, 2.0);
  std::vector<double> out(n);
  for (auto _ : state) {
    Kernel(a, b, 0.01, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void BM_volterra(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto g = ramp(n, 5.0);
  g[0] = 0.0;
  std::vector<double> f(n);
  for (auto _ : state) {
    Kernel(g, 0.01, f);
    benchmark::DoNotOptimize(f.data());
  }
}

template <auto Kernel>
void BM_hierarchy(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  const auto h = build_hierarchy(make_params(2, 1.0), M, 4);
  const auto lv = h.kernel_levels();
  const auto psi = ramp(h.n_states(), 3.0);
  std::vector<double> out(h.n_states()), scratch(h.n_states());
  for (auto _ : state) {
    Kernel(lv, psi, true, out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(h.n_states()));
}

}  // namespace

BENCHMARK(BM_exp_series<umfpt::kernels::serial::exp_series>)->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK(BM_exp_series<umfpt::kernels::omp::exp_series>)->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK(BM_convolve<umfpt::kernels::serial::convolve_trapezoid>)->Arg(1 << 11)->Arg(1 << 13);
BENCHMARK(BM_convolve<umfpt::kernels::omp::convolve_trapezoid>)->Arg(1 << 11)->Arg(1 << 13);
BENCHMARK(BM_volterra<umfpt::kernels::serial::volterra_forward>)->Arg(1 << 11)->Arg(1 << 13);
BENCHMARK(BM_volterra<umfpt::kernels::omp::volterra_forward>)->Arg(1 << 11)->Arg(1 << 13);
BENCHMARK(BM_hierarchy<umfpt::kernels::serial::hierarchy_apply>)->Arg(10)->Arg(16);
BENCHMARK(BM_hierarchy<umfpt::kernels::omp::hierarchy_apply>)->Arg(10)->Arg(16);

BENCHMARK_MAIN();

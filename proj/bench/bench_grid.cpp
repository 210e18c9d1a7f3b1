// serial vs OpenMP for the two grid sweeps: factor sups and the Kolmogorov κ z-sup
#include <benchmark/benchmark.h>

#include "stein/distances.hpp"
#include "stein/factors.hpp"

using namespace stein;

namespace {

par::Exec exec_of(const benchmark::State& st) { return st.range(0) ? par::Exec::Parallel : par::Exec::Serial; }

void BM_FactorSups(benchmark::State& st) {
  auto d = Distribution::student(5);
  auto ctx = SteinContext::kernel(d, 0);
  auto h = TestFunction::half_line(0.4);
  FactorOptions opt;
  opt.exec = exec_of(st);
  opt.grid_n = static_cast<int>(st.range(1));
  for (auto _ : st) benchmark::DoNotOptimize(factor_bounds(ctx, h, opt));
  st.SetLabel(st.range(0) ? "openmp" : "serial");
}

void BM_KappaSup(benchmark::State& st) {
  auto p = make_problem(Distribution::normal(0.4, 1.1), Distribution::normal(0, 1), Metric::Kolmogorov,
                        Method::KernelDiff);
  BoundOptions opt;
  opt.exec = exec_of(st);
  opt.oracle = false;
  opt.z_grid = static_cast<int>(st.range(1));
  for (auto _ : st) benchmark::DoNotOptimize(bound(p, opt));
  st.SetLabel(st.range(0) ? "openmp" : "serial");
}

void BM_LatticeKappaSup(benchmark::State& st) {
  auto p = make_problem(Distribution::binomial(60, 0.05), Distribution::poisson(3), Metric::Kolmogorov,
                        Method::KernelDiff, -1);
  BoundOptions opt;
  opt.exec = exec_of(st);
  opt.oracle = false;
  for (auto _ : st) benchmark::DoNotOptimize(bound(p, opt));
  st.SetLabel(st.range(0) ? "openmp" : "serial");
}

}  // namespace

BENCHMARK(BM_FactorSups)->ArgsProduct({{0, 1}, {200, 800}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KappaSup)->ArgsProduct({{0, 1}, {129, 513}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LatticeKappaSup)->Args({0})->Args({1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

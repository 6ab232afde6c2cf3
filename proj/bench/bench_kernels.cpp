// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "lippoly/generator.hpp"
#include "lippoly/kernels.hpp"
#include "lippoly/purifier.hpp"
#include "lippoly/solver.hpp"

using namespace lippoly;

namespace {

MixedProfile random_profile(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  MixedProfile p(n, m);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += (p(i, j) = u(rng));
    for (int j = 0; j < m; ++j) p(i, j) /= s;
  }
  return p;
}

template <PayoffTable (*Kernel)(const PolymatrixGame&, const MixedProfile&)>
void BM_PayoffTable(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const auto g = generate({.n = n, .m = m, .lambda = 1.0 / n, .seed = 1});
  const auto p = random_profile(n, m, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(g, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n * m * m);
}

template <std::vector<double> (*Kernel)(const PayoffTable&, const MixedProfile&)>
void BM_Regrets(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto p = random_profile(n, 4, 2);
  // Regrets only read the table, so any values will do.
  const auto filler = random_profile(n, 4, 3);
  PayoffTable table(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j) table(i, j) = filler(i, j);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(table, p));
}

template <kernels::GridScanResult (*Kernel)(const PolymatrixGame&,
                                            const std::vector<std::vector<double>>&)>
void BM_GridScan(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto g = generate({.n = n, .m = 2, .lambda = 0.5, .seed = 3});
  const auto grid = kernels::simplex_grid(2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(g, grid));
}

void BM_SolveAndPurify(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto g = generate({.n = n, .m = 2, .lambda = 1.0 / n, .seed = 4});
  PurifyOptions opts;
  opts.trace = TraceLevel::kOff;
  for (auto _ : state) {
    const auto s = solve_mixed(g, default_solver_config(g));
    benchmark::DoNotOptimize(purify(g, s.profile, PurifyMode::kAuto, opts));
  }
}

}  // namespace

BENCHMARK(BM_PayoffTable<kernels::payoff_table_serial>)
    ->Name("payoff_table/serial")->Args({50, 2})->Args({200, 2})->Args({200, 8})->Args({500, 4});
BENCHMARK(BM_PayoffTable<kernels::payoff_table_parallel>)
    ->Name("payoff_table/parallel")->Args({50, 2})->Args({200, 2})->Args({200, 8})->Args({500, 4})
    ->UseRealTime();
BENCHMARK(BM_Regrets<kernels::regrets_serial>)->Name("regrets/serial")->Arg(1000)->Arg(20000);
BENCHMARK(BM_Regrets<kernels::regrets_parallel>)->Name("regrets/parallel")->Arg(1000)->Arg(20000)->UseRealTime();
BENCHMARK(BM_GridScan<kernels::grid_scan_serial>)->Name("grid_scan/serial")->Arg(5)->Arg(7);
BENCHMARK(BM_GridScan<kernels::grid_scan_parallel>)->Name("grid_scan/parallel")->Arg(5)->Arg(7)->UseRealTime();
BENCHMARK(BM_SolveAndPurify)->Name("solve_purify")->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

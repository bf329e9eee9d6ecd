#include <benchmark/benchmark.h>

#include "timely/analytic.hpp"
#include "timely/optimizer.hpp"
#include "timely/simulator.hpp"
#include "timely/special_functions.hpp"

namespace {

timely::SystemConfig two_process(double eps, double f_max) {
  return {2, {0.1, 0.5}, {1.0, 2.0}, 1.0, eps, f_max};
}

void BM_Solve(benchmark::State& state) {
  const auto c = two_process(static_cast<double>(state.range(0)) / 10.0, 0.95);
  for (auto _ : state) {
    benchmark::DoNotOptimize(timely::solve(c));
  }
}
BENCHMARK(BM_Solve)->Arg(0)->Arg(3)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_SolveManyProcesses(benchmark::State& state) {
  const auto k = static_cast<int>(state.range(0));
  const timely::SystemConfig c{k, std::vector<double>(k, 0.5), std::vector<double>(k, 1.0), 1.0, 0.3, 0.95};
  for (auto _ : state) {
    benchmark::DoNotOptimize(timely::solve(c));
  }
}
BENCHMARK(BM_SolveManyProcesses)->RangeMultiplier(2)->Range(1, 32)->Unit(benchmark::kMillisecond);

void BM_HFunction(benchmark::State& state) {
  const timely::AnalyticContext ctx(two_process(0.6, 0.95));
  double tau = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(timely::h_fn(ctx, tau));
    tau = tau > 10.0 ? 0.0 : tau + 0.37;
  }
}
BENCHMARK(BM_HFunction);

void BM_IncompleteGamma(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(timely::reg_incomplete_gamma(x, n));
    x = x > 100.0 ? 0.1 : x * 1.3;
  }
}
BENCHMARK(BM_IncompleteGamma)->Arg(1)->Arg(8)->Arg(64);

void BM_SimulatorEpochs(benchmark::State& state) {
  const auto c = two_process(0.3, 0.95);
  timely::SimulationOptions opt;
  opt.tau = timely::solve(c).tau_star;
  opt.epochs = 100'000;
  opt.track_paths = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(timely::run(c, opt));
    ++opt.seed;
  }
  state.SetItemsProcessed(state.iterations() * opt.epochs);
}
BENCHMARK(BM_SimulatorEpochs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

// Own main: the distro benchmark_main archive is LTO bytecode from another compiler build.
BENCHMARK_MAIN();

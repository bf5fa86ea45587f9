#include <vector>

#include <benchmark/benchmark.h>

#include "fluxspin/decay.hpp"
#include "fluxspin/master_equation.hpp"
#include "fluxspin/nv.hpp"
#include "fluxspin/telegraph.hpp"

namespace {

using namespace fluxspin;

FluctuatorSpec chain(int n) {
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
  std::vector<PrecessionVector> omegas;
  for (int i = 0; i < n; ++i) {
    if (n > 1) {
      rates((i + 1) % n, i) = 1.0 + 0.3 * i;
      rates(i, (i + 1) % n) = 0.7 + 0.2 * i;
    }
    omegas.push_back({0.1 * i, 0.2, 1.0 + 0.5 * i});
  }
  return FluctuatorSpec(rates, omegas);
}

void BM_BuildGenerator(benchmark::State& state) {
  const FluctuatorSpec spec = chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Generator(spec));
}
BENCHMARK(BM_BuildGenerator)->DenseRange(1, 8, 1);

void BM_Propagate(benchmark::State& state) {
  const FluctuatorSpec spec = chain(static_cast<int>(state.range(0)));
  const Generator g(spec);
  const JointState s0 = initial_joint_state(spec, BlochVector::pure(1, 0, 0), Occupation::stationary());
  const auto times = linear_grid(0.0, 10.0, 201);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(g, s0, times));
}
BENCHMARK(BM_Propagate)->Arg(2)->Arg(4)->Arg(8);

void BM_SpectralDecay(benchmark::State& state) {
  const FluctuatorSpec spec = chain(static_cast<int>(state.range(0)));
  const Generator g(spec);
  const JointState s0 = initial_joint_state(spec, BlochVector::pure(1, 0, 0), Occupation::stationary());
  for (auto _ : state) benchmark::DoNotOptimize(analyze_decay(g, s0));
}
BENCHMARK(BM_SpectralDecay)->Arg(2)->Arg(4)->Arg(8);

void BM_EnsembleAverage(benchmark::State& state) {
  const FluctuatorSpec spec = chain(3);
  const auto times = linear_grid(0.0, 4.0, 41);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(ensemble_average(spec, BlochVector::pure(1, 0, 0), Occupation::stationary(), n, times, 7, 1));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EnsembleAverage)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Fig2Point(benchmark::State& state) {
  const EnsembleSpec e;
  const std::vector<double> grid{0.1 * e.gamma_rad};
  for (auto _ : state) benchmark::DoNotOptimize(reproduce_fig2(e, grid, 1));
}
BENCHMARK(BM_Fig2Point)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

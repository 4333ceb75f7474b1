#include <benchmark/benchmark.h>

#include <vector>

#include "spdest/coordinate_ml.hpp"
#include "spdest/ou_lab.hpp"
#include "spdest/qv.hpp"
#include "spdest/simulator.hpp"
#include "spdest/spatial_contrast.hpp"

namespace {

const spdest::SpdeParams kParams{4.0, 0.3, 0.3, 0.3};

void BM_SimulateField(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const spdest::FieldSimulator sim(kParams, spdest::NoiseSpec::q1(0.5), spdest::InitialField::polynomial(),
                                   0.01, spdest::GridSpec{n, 50, 50}, spdest::TruncationPolicy::complete());
  std::uint64_t rep = 0;
  for (auto _ : state) {
    auto obs = sim.simulate(7, rep++);
    benchmark::DoNotOptimize(obs.values().data());
  }
  state.counters["modes"] = static_cast<double>(sim.tracked_modes());
}
BENCHMARK(BM_SimulateField)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SimulatorSetup(benchmark::State& state) {
  for (auto _ : state) {
    spdest::FieldSimulator sim(kParams, spdest::NoiseSpec::q1(0.5), spdest::InitialField::polynomial(), 0.01,
                               spdest::GridSpec{2000, 50, 50}, spdest::TruncationPolicy::complete());
    benchmark::DoNotOptimize(sim.tracked_modes());
  }
}
BENCHMARK(BM_SimulatorSetup)->Unit(benchmark::kMillisecond);

void BM_ZStatistic(benchmark::State& state) {
  std::vector<double> x(static_cast<std::size_t>(state.range(0)) + 1);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i % 17) * 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(spdest::z_statistic(x, 0.5));
}
BENCHMARK(BM_ZStatistic)->Arg(2000)->Arg(8000);

void BM_MinimizeContrast(benchmark::State& state) {
  const auto grid = spdest::build_thinned_space_grid(50, 50, 10, 10, 0.05);
  std::vector<double> z;
  for (double y : grid.y) {
    for (double zz : grid.z) {
      z.push_back(spdest::limit_surface({0.3, 0.3, 0.3}, 0.5, spdest::NoiseVariant::Q1, y, zz));
    }
  }
  const spdest::SpatialContrastInput input(z, grid, 0.5, 0.01, spdest::NoiseVariant::Q1);
  for (auto _ : state) benchmark::DoNotOptimize(spdest::minimize_contrast(input));
}
BENCHMARK(BM_MinimizeContrast)->Unit(benchmark::kMillisecond);

void BM_EstimateLambda(benchmark::State& state) {
  spdest::OuModel m;
  m.n = static_cast<int>(state.range(0));
  const auto path = spdest::simulate_ou(m, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spdest::estimate_lambda_q1(path.values, m.dt(), m.epsilon, m.alpha));
  }
}
BENCHMARK(BM_EstimateLambda)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();

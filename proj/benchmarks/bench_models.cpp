#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "fracvar/analysis.hpp"
#include "fracvar/calculus.hpp"
#include "fracvar/energy_model.hpp"
#include "fracvar/sierpinski.hpp"

using namespace fracvar;

namespace {

ModelSpec gasket(int level) {
  ModelSpec s;
  s.kind = ModelKind::sierpinski;
  s.level = level;
  return s;
}

DiscreteFunction random_function(const EnergyModel& m) {
  std::mt19937_64 rng(0);
  std::normal_distribution<double> normal;
  DiscreteFunction f(m.dof_count());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = normal(rng);
  return f;
}

void BM_LevelCellData(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sg::level_cell_data(level));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(std::pow(3, level)));
}
BENCHMARK(BM_LevelCellData)->DenseRange(4, 8, 2);

void BM_BuildGasketModel(benchmark::State& state) {
  const auto spec = gasket(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_model(spec));
}
BENCHMARK(BM_BuildGasketModel)->DenseRange(3, 7, 2);

void BM_PEnergy(benchmark::State& state) {
  const auto m = build_model(gasket(6));
  const DiscreteFunction f = random_function(m);
  const double p = static_cast<double>(state.range(0)) / 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(p_energy(m, f, p));
  state.SetLabel("p=" + std::to_string(p));
}
BENCHMARK(BM_PEnergy)->Arg(3)->Arg(4)->Arg(8);

void BM_FunctionalGradient(benchmark::State& state) {
  const auto m = build_model(gasket(6));
  const DiscreteFunction f = random_function(m);
  const double p = static_cast<double>(state.range(0)) / 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(functional_gradient(m, f, p));
}
BENCHMARK(BM_FunctionalGradient)->Arg(3)->Arg(4)->Arg(8);

void BM_VerificationSuite(benchmark::State& state) {
  const auto m = build_model(gasket(4));
  SuiteOptions options;
  options.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_verification_suite(m, options));
}
BENCHMARK(BM_VerificationSuite)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

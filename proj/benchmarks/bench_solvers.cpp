#include <benchmark/benchmark.h>

#include "fracvar/energy_model.hpp"
#include "fracvar/solvers.hpp"

using namespace fracvar;

namespace {

ModelSpec spec_of(ModelKind kind, int level, int cells) {
  ModelSpec s;
  s.kind = kind;
  s.level = level;
  s.cells = cells;
  return s;
}

DiscreteFunction corner_datum(const EnergyModel& m) {
  DiscreteFunction g = DiscreteFunction::Zero(m.dof_count());
  g[0] = 1.0;
  return g;
}

// Arguments: gasket level, 2p.
void BM_GasketDirichlet(benchmark::State& state) {
  const auto m = build_model(spec_of(ModelKind::sierpinski, static_cast<int>(state.range(0)), 0));
  const double p = static_cast<double>(state.range(1)) / 2.0;
  SolverConfig cfg;
  cfg.p = p;
  const DiscreteFunction g = corner_datum(m);
  int iterations = 0;
  for (auto _ : state) {
    const auto r = solve_p_dirichlet(m, p, g, m.interior(), cfg);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.u.data());
  }
  state.counters["solver_iterations"] = iterations;
}
BENCHMARK(BM_GasketDirichlet)->Args({3, 4})->Args({4, 4})->Args({5, 4})->Args({4, 3})->Args({4, 6})->Args({4, 8})
    ->Unit(benchmark::kMillisecond);

void BM_SquareDirichlet(benchmark::State& state) {
  const auto m = build_model(spec_of(ModelKind::square, 0, static_cast<int>(state.range(0))));
  DiscreteFunction g(m.dof_count());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = m.coordinates()[static_cast<std::size_t>(i)].x();
  SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(solve_p_dirichlet(m, 2.0, g, m.interior(), cfg).u.data());
}
BENCHMARK(BM_SquareDirichlet)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_IntervalObstacle(benchmark::State& state) {
  const auto m = build_model(spec_of(ModelKind::interval, 0, static_cast<int>(state.range(0))));
  ObstacleSpec spec;
  spec.obstacle = DiscreteFunction::Constant(m.dof_count(), -0.07);
  spec.source = DiscreteFunction::Constant(m.dof_count(), -2.0);
  spec.boundary = DiscreteFunction::Zero(m.dof_count());
  for (auto _ : state) benchmark::DoNotOptimize(solve_obstacle(m, spec, m.interior(), SolverConfig{}).u.data());
}
BENCHMARK(BM_IntervalObstacle)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ConstrainedGasket(benchmark::State& state) {
  const auto m = build_model(spec_of(ModelKind::sierpinski, static_cast<int>(state.range(0)), 0));
  SolverConfig cfg;
  cfg.p = 3.0;
  const DiscreteFunction g = corner_datum(m);
  const auto spec = cubic_constraint(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_constrained_poisson(m, 3.0, spec, g, m.interior(), cfg).u.data());
}
BENCHMARK(BM_ConstrainedGasket)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_PoincareConstant(benchmark::State& state) {
  const auto m = build_model(spec_of(ModelKind::interval, 0, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(poincare_constant(m, m.interior(), 2.0));
}
BENCHMARK(BM_PoincareConstant)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fracvar/calculus.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/solvers.hpp"
#include "oracles.hpp"

using namespace fracvar;

namespace {

ModelSpec spec_of(ModelKind kind, int level, int cells) {
  ModelSpec s;
  s.kind = kind;
  s.level = level;
  s.cells = cells;
  return s;
}

// The dense bound-constrained QP on the free dofs:
//   min 1/2 x^T K_ff x - (mu_f f_f - K_fb g_b)^T x,  x >= h_f.
Eigen::VectorXd qp_oracle(const EnergyModel& m, const ObstacleSpec& spec) {
  const Eigen::MatrixXd K = oracle::dense_stiffness(m);
  const std::vector<int> free = m.interior().dofs();
  const auto n = static_cast<Eigen::Index>(free.size());
  DiscreteFunction fixed = spec.boundary;
  for (int d : free) fixed[d] = 0.0;
  const Eigen::VectorXd coupling = K * fixed;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n), l(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = K(free[i], free[j]);
    b[i] = m.dof_mass()[free[i]] * spec.source[free[i]] - coupling[free[i]];
    l[i] = spec.obstacle[free[i]];
  }
  const Eigen::VectorXd x = oracle::bound_qp(A, b, l);
  Eigen::VectorXd u = spec.boundary;
  for (Eigen::Index i = 0; i < n; ++i) u[free[i]] = x[i];
  return u;
}

ObstacleSpec interval_instance(const EnergyModel& m) {
  ObstacleSpec spec;
  spec.obstacle = DiscreteFunction::Constant(m.dof_count(), -0.07);
  spec.source = DiscreteFunction::Constant(m.dof_count(), -2.0);
  spec.boundary = DiscreteFunction::Zero(m.dof_count());
  return spec;
}

void expect_monotone(const SolverResult& r) {
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    ASSERT_LE(r.trace[k].objective, r.trace[k - 1].objective) << "trace entry " << k;
  }
}

}  // namespace

TEST(Obstacle, IntervalMatchesQuadraticProgram) {
  const auto m = build_model(spec_of(ModelKind::interval, 0, 64));
  const ObstacleSpec spec = interval_instance(m);
  const auto r = solve_obstacle(m, spec, m.interior(), SolverConfig{});
  ASSERT_TRUE(r.converged()) << r.residual;
  const Eigen::VectorXd ref = qp_oracle(m, spec);
  EXPECT_LE((r.u - ref).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_GE((r.u - spec.obstacle).minCoeff(), 0.0);

  // Without the obstacle the solution is x (x - 1), with minimum -1/4.
  int contact_ref = 0, contact = 0;
  for (int i = 1; i < 64; ++i) {
    contact_ref += ref[i] - spec.obstacle[i] <= 1e-10;
    contact += r.u[i] == spec.obstacle[i];
  }
  EXPECT_GT(contact_ref, 0);
  EXPECT_EQ(contact, contact_ref);
  EXPECT_EQ(r.diagnostics.at("contact_count"), contact);
  expect_monotone(r);
}

TEST(Obstacle, GasketMatchesQuadraticProgram) {
  const auto m = build_model(spec_of(ModelKind::sierpinski, 3, 0));
  ObstacleSpec spec;
  spec.boundary = DiscreteFunction::Zero(m.dof_count());
  spec.boundary[0] = 1.0;
  spec.source = DiscreteFunction::Constant(m.dof_count(), -3.0);
  spec.obstacle = DiscreteFunction::Constant(m.dof_count(), -0.05);
  spec.obstacle.head<3>() = spec.boundary.head<3>();
  const auto r = solve_obstacle(m, spec, m.interior(), SolverConfig{});
  ASSERT_TRUE(r.converged()) << r.residual;
  EXPECT_LE((r.u - qp_oracle(m, spec)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_GE(obstacle_inequality_margin(m, spec, m.interior(), r.u, 100, 0), -1e-8);
}

TEST(Obstacle, InactiveObstacleGivesUnconstrainedSolution) {
  const auto m = build_model(spec_of(ModelKind::square, 0, 8));
  ObstacleSpec spec;
  spec.boundary = DiscreteFunction::Zero(m.dof_count());
  for (int i = 0; i < m.dof_count(); ++i) spec.boundary[i] = m.coordinates()[static_cast<std::size_t>(i)].x();
  spec.source = DiscreteFunction::Constant(m.dof_count(), 1.0);
  spec.obstacle = DiscreteFunction::Constant(m.dof_count(), -1e6);
  const auto r = solve_obstacle(m, spec, m.interior(), SolverConfig{});
  ASSERT_TRUE(r.converged());
  const Eigen::VectorXd ref = oracle::dirichlet_solve(oracle::dense_stiffness(m), spec.boundary,
                                                      m.interior().dofs(), m.dof_mass().cwiseProduct(spec.source));
  EXPECT_LE((r.u - ref).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(r.diagnostics.at("contact_count"), 0.0);
}

TEST(Obstacle, VariationalInequality) {
  const auto m = build_model(spec_of(ModelKind::interval, 0, 64));
  const ObstacleSpec spec = interval_instance(m);
  const auto r = solve_obstacle(m, spec, m.interior(), SolverConfig{});
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    EXPECT_GE(obstacle_inequality_margin(m, spec, m.interior(), r.u, 100, seed), -1e-8);
  }
  // A feasible non-minimizer violates the inequality for some direction.
  DiscreteFunction w = r.u;
  for (int i = 20; i < 44; ++i) w[i] += 0.05;
  EXPECT_LT(obstacle_inequality_margin(m, spec, m.interior(), w, 100, 0), -1e-6);
}

TEST(Obstacle, TwoStartUniqueness) {
  const auto m = build_model(spec_of(ModelKind::interval, 0, 64));
  const ObstacleSpec spec = interval_instance(m);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lift(0.0, 2.0);
  std::vector<DiscreteFunction> solutions;
  for (int start = 0; start < 2; ++start) {
    DiscreteFunction init = spec.boundary;
    for (int i = 1; i < 64; ++i) init[i] = spec.obstacle[i] + lift(rng);
    const auto r = solve_obstacle(m, spec, m.interior(), SolverConfig{}, init);
    ASSERT_TRUE(r.converged());
    solutions.push_back(r.u);
  }
  EXPECT_LE((solutions[0] - solutions[1]).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Obstacle, InfeasibleDataIsAnInputError) {
  const auto m = build_model(spec_of(ModelKind::interval, 0, 8));
  ObstacleSpec spec;
  spec.boundary = DiscreteFunction::Zero(m.dof_count());
  spec.source = DiscreteFunction::Zero(m.dof_count());
  spec.obstacle = DiscreteFunction::Constant(m.dof_count(), 0.5);
  EXPECT_THROW(solve_obstacle(m, spec, m.interior(), SolverConfig{}), InputError);
  spec.obstacle.resize(3);
  EXPECT_THROW(solve_obstacle(m, spec, m.interior(), SolverConfig{}), InputError);
}

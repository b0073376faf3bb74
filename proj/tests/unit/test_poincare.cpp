#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
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

// 1 / smallest eigenvalue of K_ff x = lambda diag(mu_f) x.
double dense_pencil_constant(const EnergyModel& m, const Region& omega) {
  const Eigen::MatrixXd K = oracle::dense_stiffness(m);
  const std::vector<int> free = omega.dofs();
  const auto n = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd A(n, n), B = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = K(free[i], free[j]);
    B(i, i) = m.dof_mass()[free[i]];
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, B);
  return 1.0 / eig.eigenvalues().minCoeff();
}

std::vector<EnergyModel> all_models() {
  std::vector<EnergyModel> m;
  m.push_back(build_model(spec_of(ModelKind::sierpinski, 3, 0)));
  m.push_back(build_model(spec_of(ModelKind::interval, 0, 32)));
  m.push_back(build_model(spec_of(ModelKind::square, 0, 8)));
  m.push_back(build_model(spec_of(ModelKind::degenerate_square, 0, 8)));
  m.push_back(build_model(spec_of(ModelKind::superposition_square, 0, 8)));
  m.push_back(build_model(spec_of(ModelKind::product, 2, 3)));
  return m;
}

}  // namespace

TEST(Poincare, IntervalQuadraticConstant) {
  const auto m = build_model(spec_of(ModelKind::interval, 0, 256));
  const double c = poincare_constant(m, m.interior(), 2.0);
  EXPECT_NEAR(c, dense_pencil_constant(m, m.interior()), 1e-8 * c);
  EXPECT_NEAR(c, 1.0 / (std::numbers::pi * std::numbers::pi), 2e-3);
}

TEST(Poincare, QuadraticMatchesDensePencilOnAllModels) {
  for (const auto& m : all_models()) {
    const double c = poincare_constant(m, m.interior(), 2.0);
    EXPECT_NEAR(c, dense_pencil_constant(m, m.interior()), 1e-8 * c) << m.name();
  }
}

TEST(Poincare, SingleDofClosedForm) {
  for (const auto& m : all_models()) {
    const int d = m.interior().dofs()[m.interior().size() / 2];
    std::vector<bool> mask(static_cast<std::size_t>(m.dof_count()), false);
    mask[static_cast<std::size_t>(d)] = true;
    const Region single(mask);
    DiscreteFunction e = DiscreteFunction::Zero(m.dof_count());
    e[d] = 1.0;
    for (double p : {2.0, 3.0}) {
      const double expected = m.dof_mass()[d] / p_energy(m, e, p);
      EXPECT_NEAR(poincare_constant(m, single, p), expected, 1e-9 * expected) << m.name() << " p=" << p;
    }
  }
}

TEST(Poincare, MonotoneUnderRegionInclusion) {
  for (const auto& m : all_models()) {
    const Region whole = m.interior();
    const Region half = m.region_where([](const Eigen::Vector3d& x) { return x.x() < 0.5; });
    const Region quarter = m.region_where([](const Eigen::Vector3d& x) { return x.x() < 0.25; });
    ASSERT_TRUE(quarter.subset_of(half));
    ASSERT_FALSE(quarter.empty()) << m.name();
    for (double p : {1.5, 2.0, 3.0}) {
      const double cq = poincare_constant(m, quarter, p);
      const double ch = poincare_constant(m, half, p);
      const double cw = poincare_constant(m, whole, p);
      EXPECT_LE(cq, ch + 1e-10) << m.name() << " p=" << p;
      EXPECT_LE(ch, cw + 1e-10) << m.name() << " p=" << p;
    }
  }
}

TEST(Poincare, PowerConstantIsASupremum) {
  // No sampled function beats the reported constant.
  const auto m = build_model(spec_of(ModelKind::sierpinski, 3, 0));
  const double c = poincare_constant(m, m.interior(), 3.0);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    DiscreteFunction u = oracle::random_vector(m.dof_count(), rng);
    for (int i = 0; i < 3; ++i) u[i] = 0.0;
    const double ratio = std::pow(lp_norm(m, u, 3.0), 3.0) / p_energy(m, u, 3.0);
    EXPECT_LE(ratio, c * (1 + 1e-10));
  }
}

TEST(Poincare, EmptyRegionAndDefiniteness) {
  const auto m = build_model(spec_of(ModelKind::interval, 0, 8));
  const Region none(std::vector<bool>(static_cast<std::size_t>(m.dof_count()), false));
  EXPECT_THROW(poincare_constant(m, none, 2.0), InputError);
  EXPECT_TRUE(dirichlet_form_definite(m, m.interior()));
  EXPECT_FALSE(dirichlet_form_definite(m, m.interior(), [](const Fiber& x) { return x.id != 3 && x.id != 4; }));
}

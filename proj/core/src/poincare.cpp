#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "fracvar/calculus.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/solvers.hpp"
#include "lbfgs.hpp"
#include "solver_support.hpp"

namespace fracvar {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// 1 / lambda_min of K_II x = lambda diag(mu_I) x by inverse iteration.
double quadratic_constant(const EnergyModel& model, const detail::FreeSpace& fs) {
  const SpMat K = stiffness_matrix(model);
  std::vector<int> index(static_cast<std::size_t>(model.dof_count()), -1);
  for (std::size_t k = 0; k < fs.free.size(); ++k) index[static_cast<std::size_t>(fs.free[k])] = static_cast<int>(k);
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index c = 0; c < K.outerSize(); ++c) {
    const int cc = index[static_cast<std::size_t>(c)];
    if (cc < 0) continue;
    for (SpMat::InnerIterator it(K, c); it; ++it) {
      const int rr = index[static_cast<std::size_t>(it.row())];
      if (rr >= 0) triplets.emplace_back(rr, cc, it.value());
    }
  }
  SpMat A(fs.size(), fs.size());
  A.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd D = ldlt.vectorD();
  if (!(D.minCoeff() > 1e-12 * D.cwiseAbs().maxCoeff())) return std::numeric_limits<double>::infinity();

  const Eigen::VectorXd& m = fs.mass;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(fs.size());
  double lambda = x.dot(A * x) / x.dot(m.cwiseProduct(x));
  for (int k = 0; k < 100000; ++k) {
    Eigen::VectorXd y = ldlt.solve(m.cwiseProduct(x));
    y /= std::sqrt(y.dot(m.cwiseProduct(y)));
    const double next = y.dot(A * y);
    x = std::move(y);
    const bool settled = std::abs(next - lambda) <= 1e-15 * next;
    lambda = next;
    if (settled) break;
  }
  return 1.0 / lambda;
}

// sup |u|_p^p / E^(p)(u) by minimizing the inverse quotient with L-BFGS from
// the constant bump on Omega.
double power_constant(const EnergyModel& model, const detail::FreeSpace& fs, double p) {
  const auto& mass = fs.mass;
  detail::SmoothProblem problem;
  problem.evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const DiscreteFunction u = fs.embed(x);
    const double E = p_energy(model, u, p);
    const double N = (mass.array() * x.array().abs().pow(p)).sum();
    if (grad) {
      const Eigen::VectorXd dE = fs.restrict(functional_gradient(model, u, p));
      const Eigen::VectorXd dN = p * (mass.array() * x.array().abs().pow(p - 1.0) * x.array().sign()).matrix();
      *grad = (dE * N - E * dN) / (N * N);
    }
    return E / N;
  };
  problem.residual = [&](const Eigen::VectorXd& grad) { return fs.residual(grad); };

  Eigen::VectorXd x0 = Eigen::VectorXd::Ones(fs.size());
  const double R0 = problem.evaluate(x0, nullptr);
  detail::DescentOptions options;
  options.tolerance = 1e-10 * R0;
  options.max_iterations = 20000;
  const auto outcome = detail::lbfgs_minimize(problem, x0, options, {});
  return 1.0 / outcome.value;
}

}  // namespace

double poincare_constant(const EnergyModel& model, const Region& omega, double p) {
  check_exponent(p);
  const detail::FreeSpace fs = detail::make_free_space(model, DiscreteFunction::Zero(model.dof_count()), omega);
  if (!dirichlet_form_definite(model, omega)) return std::numeric_limits<double>::infinity();
  return p == 2.0 ? quadratic_constant(model, fs) : power_constant(model, fs, p);
}

}  // namespace fracvar

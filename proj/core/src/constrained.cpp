#include <cmath>
#include <sstream>

#include "fracvar/calculus.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/solvers.hpp"
#include "solver_support.hpp"

namespace fracvar {

namespace {

constexpr double kMaxShift = 1024.0;
constexpr double kDenominatorFloor = 1e-8;
constexpr int kMaxOuterIterations = 60;

double constraint_value(const EnergyModel& model, const ConstraintSpec& spec, const DiscreteFunction& w) {
  const auto& mu = model.dof_mass();
  double total = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (mu[i] > 0.0) total += mu[i] * spec.G(w[i]);
  }
  return total;
}

// Finds t with J[g + t 1_Omega] = 0 by bisection after doubling the search
// interval up to kMaxShift.
double feasible_shift(const EnergyModel& model, const ConstraintSpec& spec, const detail::FreeSpace& fs,
                      double tolerance) {
  const Eigen::VectorXd x0 = fs.restrict(fs.base);
  const auto phi = [&](double t) {
    return constraint_value(model, spec, fs.embed(x0 + Eigen::VectorXd::Constant(fs.size(), t)));
  };
  const double j0 = phi(0.0);
  if (std::abs(j0) <= tolerance) return 0.0;

  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  for (double T = 1.0; T <= kMaxShift && !bracketed; T *= 2.0) {
    for (double t : {T, -T}) {
      if (std::signbit(phi(t)) != std::signbit(j0)) {
        lo = 0.0;
        hi = t;
        bracketed = true;
        break;
      }
    }
  }
  if (!bracketed) {
    std::ostringstream os;
    os << "constraint '" << spec.name << "' is infeasible: J[g + t 1_Omega] keeps the sign of J[g] = " << j0
       << " for |t| <= " << kMaxShift;
    throw SolverError(os.str());
  }
  double f_lo = j0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = phi(mid);
    if (f_mid == 0.0 || std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(mid))) return mid;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SolverResult solve_constrained_poisson(const EnergyModel& model, double p, const ConstraintSpec& spec,
                                       const DiscreteFunction& g, const Region& omega, const SolverConfig& cfg) {
  check_exponent(p);
  SolverConfig c = cfg;
  c.p = p;
  c.validate();
  validate_constraint(spec, p, 1000, c.seed);
  const detail::FreeSpace fs = detail::make_free_space(model, g, omega);
  const double tolerance = c.effective_tolerance();
  const ConvexIntegrand energy_integrand = power_integrand(p);
  const auto& mu = model.dof_mass();

  SolverResult result;
  result.problem = "constrained";
  const double shift = feasible_shift(model, spec, fs, 1e-3 * c.constraint_tolerance);
  result.diagnostics["feasibility_shift"] = shift;
  Eigen::VectorXd x = fs.restrict(g) + Eigen::VectorXd::Constant(fs.size(), shift);

  std::vector<double> schedule;
  if (p < 2.0) schedule = c.effective_schedule();

  double y = 0.0;
  double rho = 10.0;
  double previous_violation = std::abs(constraint_value(model, spec, fs.embed(x)));
  int used = 0;
  detail::DescentOutcome outcome;
  double violation = previous_violation;
  bool done = false;
  for (int k = 0; k < kMaxOuterIterations && !done; ++k) {
    const double eps = k < static_cast<int>(schedule.size()) ? schedule[static_cast<std::size_t>(k)] : 0.0;
    detail::SmoothProblem problem;
    problem.evaluate = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
      const DiscreteFunction w = fs.embed(z);
      DiscreteFunction full_grad;
      double value = detail::integrand_objective(model, energy_integrand, w, eps, nullptr, grad ? &full_grad : nullptr);
      const double J = constraint_value(model, spec, w);
      value += -y * J + 0.5 * rho * J * J;
      if (grad) {
        const double coupling = -y + rho * J;
        for (std::size_t i = 0; i < fs.free.size(); ++i) {
          const int d = fs.free[i];
          full_grad[d] += coupling * mu[d] * spec.dG(w[d]);
        }
        *grad = fs.restrict(full_grad);
      }
      return value;
    };
    problem.residual = [&](const Eigen::VectorXd& grad) { return fs.residual(grad); };
    detail::DescentOptions options;
    options.tolerance = eps > 0.0 ? std::max(tolerance, 1e-2 * eps) : tolerance;
    options.max_iterations = std::max(0, c.max_iterations - used);
    options.memory = c.memory;
    options.armijo = c.armijo;
    options.backtrack = c.backtrack;
    const int offset = used;
    outcome = detail::lbfgs_minimize(problem, x, options, [&](int it, double value, double residual) {
      result.trace.push_back({offset + it, k, value, residual});
    });
    used += outcome.iterations;
    x = outcome.x;

    const double J = constraint_value(model, spec, fs.embed(x));
    violation = std::abs(J);
    y -= rho * J;
    done = eps == 0.0 && violation <= c.constraint_tolerance && outcome.status == detail::DescentStatus::converged;
    if (!done && violation > 0.25 * previous_violation && rho < 1e12) rho *= 10.0;
    previous_violation = violation;
    if (outcome.status != detail::DescentStatus::converged && used >= c.max_iterations) break;
  }

  result.u = fs.embed(x);
  result.objective = p_energy(model, result.u, p);
  result.iterations = used;
  result.diagnostics["constraint"] = constraint_value(model, spec, result.u);
  result.diagnostics["lambda_augmented"] = y / p;
  result.diagnostics["penalty"] = rho;

  // Multiplier by the quotient E^(p)(u, w) / sum mu G'(u) w with w the first
  // interior hat whose denominator is not negligible.
  const Eigen::VectorXd pairing = model.gradient_matrix().transpose() * p_flux(model, gradient(model, result.u), p);
  for (int d : fs.free) {
    const double denominator = mu[d] * spec.dG(result.u[d]);
    if (std::abs(denominator) > kDenominatorFloor) {
      result.lambda = pairing[d] / denominator;
      result.diagnostics["lambda_test_dof"] = d;
      break;
    }
  }
  if (!result.lambda) {
    result.notes.push_back("degenerate multiplier: sum mu G'(u) phi_i is below 1e-8 for every interior hat phi_i");
  }

  const double lambda = result.lambda.value_or(y / p);
  const Eigen::VectorXd norms = hat_norms(model, p);
  double stationarity = 0.0;
  for (int d : test_dofs(omega, c.max_test_functions, c.seed)) {
    const double r = pairing[d] - lambda * mu[d] * spec.dG(result.u[d]);
    stationarity = std::max(stationarity, std::abs(r) / norms[d]);
  }
  result.residual = stationarity;
  result.diagnostics["multiplier_residual"] = stationarity;
  result.diagnostics["inner_residual"] = outcome.residual;
  if (result.lambda) result.diagnostics["lambda_agreement"] = std::abs(*result.lambda - y / p);

  if (done && stationarity <= tolerance) {
    result.status = SolverStatus::converged;
  } else if (used >= c.max_iterations) {
    result.status = SolverStatus::max_iterations;
  } else {
    result.status = outcome.status == detail::DescentStatus::converged ? SolverStatus::stalled
                                                                        : detail::to_solver_status(outcome.status);
  }
  return result;
}

}  // namespace fracvar

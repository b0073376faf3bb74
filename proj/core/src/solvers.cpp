#include "fracvar/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "fracvar/calculus.hpp"
#include "fracvar/errors.hpp"
#include "solver_support.hpp"

namespace fracvar {

namespace detail {

DiscreteFunction FreeSpace::embed(const Eigen::VectorXd& x) const {
  DiscreteFunction u = base;
  for (std::size_t k = 0; k < free.size(); ++k) u[free[k]] = x[static_cast<Eigen::Index>(k)];
  return u;
}

Eigen::VectorXd FreeSpace::restrict(const DiscreteFunction& u) const {
  Eigen::VectorXd x(size());
  for (std::size_t k = 0; k < free.size(); ++k) x[static_cast<Eigen::Index>(k)] = u[free[k]];
  return x;
}

double FreeSpace::residual(const Eigen::VectorXd& grad) const {
  double r = 0.0;
  for (Eigen::Index k = 0; k < grad.size(); ++k) r = std::max(r, std::abs(grad[k]) / mass[k]);
  return r;
}

void check_function_size(const EnergyModel& model, const DiscreteFunction& f, const std::string& what) {
  if (f.size() != model.dof_count()) {
    throw InputError(what + " has " + std::to_string(f.size()) + " values, model has " +
                     std::to_string(model.dof_count()) + " dofs");
  }
  if (!f.allFinite()) throw InputError(what + " has non-finite values");
}

FreeSpace make_free_space(const EnergyModel& model, const DiscreteFunction& g, const Region& omega) {
  check_function_size(model, g, "boundary datum");
  if (static_cast<Eigen::Index>(omega.mask().size()) != model.dof_count()) {
    throw InputError("region does not belong to the model");
  }
  FreeSpace fs;
  fs.free = omega.dofs();
  if (fs.free.empty()) throw InputError("region has no interior dofs");
  fs.base = g;
  fs.mass.resize(fs.size());
  for (std::size_t k = 0; k < fs.free.size(); ++k) {
    const double m = model.dof_mass()[fs.free[k]];
    if (!(m > 0.0)) throw InputError("free dof " + std::to_string(fs.free[k]) + " has zero mass");
    fs.mass[static_cast<Eigen::Index>(k)] = m;
  }
  return fs;
}

double integrand_objective(const EnergyModel& model, const ConvexIntegrand& integrand, const DiscreteFunction& u,
                           double eps, const DiscreteFunction* source, DiscreteFunction* grad) {
  const FiberVectorField du = gradient(model, u);
  double total = 0.0;
  FiberVectorField flux;
  if (grad) flux.resize(du.size());
  for (const auto& x : model.fibers()) {
    const auto v = du.segment(x.offset, x.dim);
    total += x.weight * integrand.value(x, v, eps);
    if (grad) {
      auto out = flux.segment(x.offset, x.dim);
      integrand.gradient(x, v, eps, out);
      out *= x.weight;
    }
  }
  if (grad) *grad = model.gradient_matrix().transpose() * flux;
  if (source) {
    const auto& mu = model.dof_mass();
    total -= (mu.array() * source->array() * u.array()).sum();
    if (grad) grad->array() -= mu.array() * source->array();
  }
  return total;
}

SolverStatus to_solver_status(DescentStatus status) {
  switch (status) {
    case DescentStatus::converged:
      return SolverStatus::converged;
    case DescentStatus::max_iterations:
      return SolverStatus::max_iterations;
    case DescentStatus::stalled:
      return SolverStatus::stalled;
  }
  return SolverStatus::stalled;
}

}  // namespace detail

namespace {

// (t + eps^2)^{(p-2)/2} with 0 at t + eps^2 = 0.
double power_factor(double t, double p, double eps) {
  const double r = t + eps * eps;
  if (p == 2.0) return 1.0;
  return r > 0.0 ? std::pow(r, 0.5 * (p - 2.0)) : 0.0;
}

double power_value(double t, double p, double eps) {
  const double r = t + eps * eps;
  return p == 2.0 ? r : std::pow(r, 0.5 * p);
}

}  // namespace

ConvexIntegrand power_integrand(double p) {
  check_exponent(p);
  ConvexIntegrand f;
  std::ostringstream name;
  name << "power(p=" << p << ")";
  f.name = name.str();
  f.p = p;
  f.singular_at_zero = p < 2.0;
  f.value = [p](const Fiber&, FiberVector v, double eps) { return power_value(v.squaredNorm(), p, eps); };
  f.gradient = [p](const Fiber&, FiberVector v, double eps, Eigen::Ref<Eigen::VectorXd> out) {
    out = (p * power_factor(v.squaredNorm(), p, eps)) * v;
  };
  return f;
}

ConvexIntegrand anisotropic_integrand(double p) {
  check_exponent(p);
  ConvexIntegrand f;
  std::ostringstream name;
  name << "anisotropic(p=" << p << ")";
  f.name = name.str();
  f.p = p;
  f.singular_at_zero = p < 2.0;
  f.value = [p](const Fiber& x, FiberVector v, double eps) {
    if (x.dim < 2) return 0.0;
    const double t = v.dot(x.frame.col(0));
    return power_value(v.squaredNorm(), p, eps) + power_value(t * t, p, eps);
  };
  f.gradient = [p](const Fiber& x, FiberVector v, double eps, Eigen::Ref<Eigen::VectorXd> out) {
    if (x.dim < 2) {
      out.setZero();
      return;
    }
    const double t = v.dot(x.frame.col(0));
    out = (p * power_factor(v.squaredNorm(), p, eps)) * v + (p * power_factor(t * t, p, eps) * t) * x.frame.col(0);
  };
  f.b = [](const Fiber& x) { return x.dim >= 2 ? 1.0 : 0.0; };
  return f;
}

void validate_integrand(const EnergyModel& model, const ConvexIntegrand& integrand, int samples,
                        std::uint64_t seed) {
  if (!integrand.value || !integrand.gradient) throw InputError("integrand '" + integrand.name + "' is incomplete");
  check_exponent(integrand.p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> pick(0, static_cast<int>(model.fiber_count()) - 1);
  const double scales[] = {0.1, 1.0, 10.0};
  for (int s = 0; s < samples; ++s) {
    const Fiber& x = model.fibers()[static_cast<std::size_t>(pick(rng))];
    const double scale = scales[s % 3];
    Eigen::VectorXd u(x.dim), v(x.dim);
    for (int k = 0; k < x.dim; ++k) {
      u[k] = scale * normal(rng);
      v[k] = scale * normal(rng);
    }
    const double fu = integrand.value(x, u, 0.0);
    const double fv = integrand.value(x, v, 0.0);
    const double fm = integrand.value(x, 0.5 * (u + v), 0.0);
    const double slack = 1e-12 * (1.0 + std::abs(fu) + std::abs(fv));
    if (fm > 0.5 * (fu + fv) + slack) {
      throw InputError("integrand '" + integrand.name + "' violates convexity on fiber " + std::to_string(x.id));
    }
    const double a = integrand.a(x);
    const double b = integrand.b(x);
    if (!(b >= 0.0) || !std::isfinite(a)) {
      throw InputError("integrand '" + integrand.name + "' has an invalid coercivity certificate");
    }
    if (fu < -a + b * std::pow(u.norm(), integrand.p) - slack) {
      throw InputError("integrand '" + integrand.name + "' violates its coercivity bound on fiber " +
                       std::to_string(x.id));
    }
  }
}

ConstraintSpec linear_constraint() {
  ConstraintSpec c;
  c.name = "linear";
  c.G = [](double z) { return z; };
  c.dG = [](double) { return 1.0; };
  c.C = 1.0;
  return c;
}

ConstraintSpec cubic_constraint(double shift, double C) {
  ConstraintSpec c;
  std::ostringstream name;
  name << "cubic(c=" << shift << ")";
  c.name = name.str();
  c.G = [shift](double z) { return z * z * z / 3.0 - shift * z; };
  c.dG = [shift](double z) { return z * z - shift; };
  c.C = C;
  return c;
}

void validate_constraint(const ConstraintSpec& spec, double p, int samples, std::uint64_t seed) {
  if (!spec.G || !spec.dG) throw InputError("constraint '" + spec.name + "' is incomplete");
  if (!(spec.C > 0.0) || !(spec.growth_range > 0.0)) {
    throw InputError("constraint '" + spec.name + "' needs positive growth constant and range");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> z_dist(-spec.growth_range, spec.growth_range);
  for (int s = 0; s < samples; ++s) {
    const double z = s == 0 ? spec.growth_range : z_dist(rng);
    const double lhs = std::abs(spec.dG(z));
    const double rhs = spec.C * (std::pow(std::abs(z), p - 1.0) + 1.0);
    if (!(lhs <= rhs * (1.0 + 1e-12))) {
      std::ostringstream os;
      os << "constraint '" << spec.name << "' violates |G'(z)| <= C (|z|^{p-1} + 1) at z = " << z << " (" << lhs
         << " > " << rhs << ")";
      throw InputError(os.str());
    }
  }
}

double SolverConfig::effective_tolerance() const {
  if (tolerance > 0.0) return tolerance;
  return p == 2.0 ? 1e-8 : 1e-6;
}

std::vector<double> SolverConfig::effective_schedule() const {
  if (!eps_schedule.empty()) return eps_schedule;
  std::vector<double> s;
  for (int k = 0; k < 8; ++k) s.push_back(1e-1 * std::pow(10.0, -0.5 * k));
  return s;
}

void SolverConfig::validate() const {
  check_exponent(p);
  if (!(tolerance >= 0.0) || !std::isfinite(tolerance)) throw InputError("solver.tolerance must be positive");
  if (max_iterations < 1) throw InputError("solver.max_iterations must be at least 1");
  if (memory < 1) throw InputError("solver.memory must be at least 1");
  if (!(armijo > 0.0 && armijo < 0.5)) throw InputError("solver.armijo must lie in (0, 0.5)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InputError("solver.backtrack must lie in (0, 1)");
  if (!(constraint_tolerance > 0.0)) throw InputError("solver.constraint_tolerance must be positive");
  if (max_test_functions < 1) throw InputError("solver.max_test_functions must be at least 1");
  for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
    if (!(eps_schedule[k] > 0.0)) throw InputError("solver.eps_schedule entries must be positive");
    if (k > 0 && !(eps_schedule[k] < eps_schedule[k - 1])) {
      throw InputError("solver.eps_schedule must be strictly decreasing");
    }
  }
}

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged:
      return "converged";
    case SolverStatus::max_iterations:
      return "max_iterations";
    case SolverStatus::stalled:
      return "stalled";
  }
  return "unknown";
}

Eigen::VectorXd hat_norms(const EnergyModel& model, double p) {
  check_exponent(p);
  const auto& G = model.gradient_matrix();
  Eigen::VectorXd energy = Eigen::VectorXd::Zero(model.dof_count());
  std::vector<std::pair<int, double>> columns;
  for (const auto& x : model.fibers()) {
    columns.clear();
    for (int r = 0; r < x.dim; ++r) {
      for (GradientMatrix::InnerIterator it(G, x.offset + r); it; ++it) {
        const int c = static_cast<int>(it.col());
        auto found = std::find_if(columns.begin(), columns.end(), [c](const auto& e) { return e.first == c; });
        if (found == columns.end()) {
          columns.emplace_back(c, it.value() * it.value());
        } else {
          found->second += it.value() * it.value();
        }
      }
    }
    for (const auto& [c, sq] : columns) energy[c] += x.weight * std::pow(sq, 0.5 * p);
  }
  Eigen::VectorXd out(model.dof_count());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = std::pow(model.dof_mass()[i], 1.0 / p) + std::pow(energy[i], 1.0 / p);
  }
  return out;
}

std::vector<int> test_dofs(const Region& omega, int max_tests, std::uint64_t seed) {
  std::vector<int> dofs = omega.dofs();
  if (max_tests < 1 || static_cast<int>(dofs.size()) <= max_tests) return dofs;
  std::mt19937_64 rng(seed);
  std::shuffle(dofs.begin(), dofs.end(), rng);
  dofs.resize(static_cast<std::size_t>(max_tests));
  std::sort(dofs.begin(), dofs.end());
  return dofs;
}

double euler_lagrange_residual(const EnergyModel& model, const DiscreteFunction& u, double p, const Region& omega,
                               int max_tests, std::uint64_t seed) {
  detail::check_function_size(model, u, "function");
  const FiberVectorField flux = p_flux(model, gradient(model, u), p);
  const Eigen::VectorXd pairing = model.gradient_matrix().transpose() * flux;
  const Eigen::VectorXd norms = hat_norms(model, p);
  double r = 0.0;
  for (int i : test_dofs(omega, max_tests, seed)) r = std::max(r, std::abs(pairing[i]) / norms[i]);
  return r;
}

bool dirichlet_form_definite(const EnergyModel& model, const Region& omega,
                             const std::function<bool(const Fiber&)>& fibers) {
  const std::vector<int> free = omega.dofs();
  if (free.empty()) return false;
  std::vector<int> column(static_cast<std::size_t>(model.dof_count()), -1);
  for (std::size_t k = 0; k < free.size(); ++k) column[static_cast<std::size_t>(free[k])] = static_cast<int>(k);

  const auto& G = model.gradient_matrix();
  std::vector<Eigen::Triplet<double>> triplets;
  int rows = 0;
  for (const auto& x : model.fibers()) {
    if (fibers && !fibers(x)) continue;
    const double w = std::sqrt(x.weight);
    for (int r = 0; r < x.dim; ++r, ++rows) {
      for (GradientMatrix::InnerIterator it(G, x.offset + r); it; ++it) {
        const int c = column[static_cast<std::size_t>(it.col())];
        if (c >= 0) triplets.emplace_back(rows, c, w * it.value());
      }
    }
  }
  Eigen::SparseMatrix<double> A(rows, static_cast<Eigen::Index>(free.size()));
  A.setFromTriplets(triplets.begin(), triplets.end());
  const Eigen::SparseMatrix<double> K = A.transpose() * A;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd D = ldlt.vectorD();
  const double largest = D.cwiseAbs().maxCoeff();
  return largest > 0.0 && D.minCoeff() > 1e-12 * largest;
}

SolverResult minimize_convex(const EnergyModel& model, const ConvexIntegrand& integrand, const DiscreteFunction& g,
                             const Region& omega, const SolverConfig& cfg, const std::optional<DiscreteFunction>& source,
                             const std::optional<DiscreteFunction>& initial) {
  cfg.validate();
  validate_integrand(model, integrand, 200, cfg.seed);
  const detail::FreeSpace fs = detail::make_free_space(model, g, omega);
  if (source) detail::check_function_size(model, *source, "source");
  if (initial) detail::check_function_size(model, *initial, "initial guess");

  SolverResult result;
  result.problem = "minimize";
  const bool definite =
      dirichlet_form_definite(model, omega, [&](const Fiber& x) { return integrand.b(x) > 0.0; });
  result.diagnostics["poincare_verified"] = definite ? 1.0 : 0.0;
  if (!definite) {
    result.notes.push_back("coercive fibers do not control all free dofs; the minimizer may not be unique");
  }

  std::vector<double> schedule;
  if (integrand.singular_at_zero) schedule = cfg.effective_schedule();
  schedule.push_back(0.0);

  SolverConfig tol_cfg = cfg;
  tol_cfg.p = integrand.p;
  const double tolerance = tol_cfg.effective_tolerance();
  const DiscreteFunction* src = source ? &*source : nullptr;

  Eigen::VectorXd x = fs.restrict(initial ? *initial : g);
  int used = 0;
  detail::DescentOutcome outcome;
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    const double eps = schedule[stage];
    detail::SmoothProblem problem;
    problem.evaluate = [&](const Eigen::VectorXd& y, Eigen::VectorXd* grad) {
      DiscreteFunction full_grad;
      const double value = detail::integrand_objective(model, integrand, fs.embed(y), eps, src,
                                                       grad ? &full_grad : nullptr);
      if (grad) *grad = fs.restrict(full_grad);
      return value;
    };
    problem.residual = [&](const Eigen::VectorXd& grad) { return fs.residual(grad); };

    detail::DescentOptions options;
    options.tolerance = eps > 0.0 ? std::max(tolerance, 1e-2 * eps) : tolerance;
    options.max_iterations = std::max(0, cfg.max_iterations - used);
    options.memory = cfg.memory;
    options.armijo = cfg.armijo;
    options.backtrack = cfg.backtrack;
    const int offset = used;
    const int stage_id = static_cast<int>(stage);
    outcome = detail::lbfgs_minimize(problem, x, options, [&](int it, double value, double residual) {
      if (it == 0 && stage > 0) return;
      result.trace.push_back({offset + it, stage_id, value, residual});
    });
    used += outcome.iterations;
    x = outcome.x;
    if (outcome.status != detail::DescentStatus::converged && eps > 0.0) {
      result.notes.push_back("smoothing stage " + std::to_string(stage) + " ended without reaching its tolerance");
    }
  }

  result.u = fs.embed(x);
  result.objective = outcome.value;
  result.residual = outcome.residual;
  result.iterations = used;
  result.status = detail::to_solver_status(outcome.status);
  return result;
}

SolverResult solve_p_dirichlet(const EnergyModel& model, double p, const DiscreteFunction& g, const Region& omega,
                               const SolverConfig& cfg) {
  check_exponent(p);
  SolverConfig c = cfg;
  c.p = p;
  SolverResult r = minimize_convex(model, power_integrand(p), g, omega, c);
  r.problem = "dirichlet";
  r.diagnostics["el_residual"] = euler_lagrange_residual(model, r.u, p, omega, c.max_test_functions, c.seed);
  return r;
}

SolverResult solve_anisotropic(const EnergyModel& model, double p, const DiscreteFunction& g, const Region& omega,
                               const SolverConfig& cfg) {
  check_exponent(p);
  SolverConfig c = cfg;
  c.p = p;
  SolverResult r = minimize_convex(model, anisotropic_integrand(p), g, omega, c);
  r.problem = "anisotropic";
  r.diagnostics["p_energy"] = p_energy(model, r.u, p);
  return r;
}

}  // namespace fracvar

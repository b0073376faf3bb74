#pragma once

// Direct-method solvers over the affine class g + H_0^{1,p}(Omega): dofs in the
// region Omega are free, all other dofs keep the values of the datum g.
//
// Functionals have the form I[w] = sum_x m_x f_x(d_x w) - sum_i mu_i s(i) w(i)
// for a per-fiber convex integrand f_x and an optional source s.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracvar/energy_model.hpp"

namespace fracvar {

using FiberVector = Eigen::Ref<const Eigen::VectorXd>;

/// Per-fiber convex integrand with a coercivity certificate
///   f_x(v) >= -a(x) + b(x) |v|^p.
/// value/gradient receive a smoothing parameter eps >= 0; integrands that are
/// not differentiable at v = 0 use it to regularize, the others ignore it.
struct ConvexIntegrand {
  std::string name;
  std::function<double(const Fiber&, FiberVector, double eps)> value;
  std::function<void(const Fiber&, FiberVector, double eps, Eigen::Ref<Eigen::VectorXd> out)> gradient;
  std::function<double(const Fiber&)> a = [](const Fiber&) { return 0.0; };
  std::function<double(const Fiber&)> b = [](const Fiber&) { return 1.0; };
  double p = 2.0;
  /// True when value is only C^1 at v = 0 and benefits from eps-continuation.
  bool singular_at_zero = false;
};

/// f_x(v) = |v|^p, smoothed as (|v|^2 + eps^2)^{p/2}.
ConvexIntegrand power_integrand(double p);

/// f_x(v) = |v|^p + |<v, eta_x>|^p on fibers of dimension >= 2, where eta_x is
/// the first frame vector; f_x = 0 on one-dimensional fibers.
ConvexIntegrand anisotropic_integrand(double p);

/// Sampled check of convexity (midpoint inequality) and of the coercivity
/// certificate on random fibers. Throws InputError naming the violation.
void validate_integrand(const EnergyModel& model, const ConvexIntegrand& integrand, int samples = 200,
                        std::uint64_t seed = 0);

/// Integral constraint J[w] = sum_i mu_i G(w(i)) = 0 with the growth bound
/// |G'(z)| <= C (|z|^{p-1} + 1), sampled on [-growth_range, growth_range].
struct ConstraintSpec {
  std::string name;
  std::function<double(double)> G;
  std::function<double(double)> dG;
  double C = 1.0;
  double growth_range = 10.0;
};

/// G(z) = z.
ConstraintSpec linear_constraint();
/// G(z) = z^3 / 3 - c z.
ConstraintSpec cubic_constraint(double c, double C = 10.0);

/// Throws InputError if the growth bound fails on the sample grid.
void validate_constraint(const ConstraintSpec& spec, double p, int samples = 1000, std::uint64_t seed = 0);

struct ObstacleSpec {
  DiscreteFunction obstacle;  // h
  DiscreteFunction source;    // f
  DiscreteFunction boundary;  // g; the values outside Omega are kept
};

struct SolverConfig {
  double p = 2.0;
  /// Optimality tolerance; 0 selects 1e-8 for p = 2 and 1e-6 otherwise.
  double tolerance = 0.0;
  int max_iterations = 100000;
  int memory = 10;
  double armijo = 1e-4;
  double backtrack = 0.5;
  /// Smoothing levels for 1 < p < 2, strictly decreasing and positive; a
  /// final unsmoothed stage is always appended. Empty selects
  /// eps_k = 1e-1 * 10^{-k/2}, k = 0..7.
  std::vector<double> eps_schedule;
  /// Tolerance on |J[u]| for constrained problems.
  double constraint_tolerance = 1e-10;
  /// Test-basis cap for Euler-Lagrange residuals.
  int max_test_functions = 500;
  std::uint64_t seed = 0;

  double effective_tolerance() const;
  std::vector<double> effective_schedule() const;
  /// Throws InputError if a field is out of range.
  void validate() const;
};

enum class SolverStatus { converged, max_iterations, stalled };

std::string_view to_string(SolverStatus status);

struct TraceEntry {
  int iteration = 0;
  int stage = 0;
  double objective = 0.0;
  double residual = 0.0;
};

struct SolverResult {
  std::string problem;
  DiscreteFunction u;
  double objective = 0.0;
  /// Optimality residual: max over free dofs of |dI/du_i| / mu_i (projected
  /// for the obstacle problem; the multiplier equation residual over the test
  /// basis for the constrained problem).
  double residual = 0.0;
  std::optional<double> lambda;
  int iterations = 0;
  SolverStatus status = SolverStatus::max_iterations;
  std::vector<TraceEntry> trace;
  /// Named scalar diagnostics (Euler-Lagrange residual, constraint value, ...).
  std::map<std::string, double> diagnostics;
  std::vector<std::string> notes;

  bool converged() const { return status == SolverStatus::converged; }
};

/// Minimizes sum_x m_x f_x(d_x w) - sum_i mu_i source(i) w(i) over
/// g + H_0(Omega), starting from g (or from initial when given).
SolverResult minimize_convex(const EnergyModel& model, const ConvexIntegrand& integrand, const DiscreteFunction& g,
                             const Region& omega, const SolverConfig& cfg,
                             const std::optional<DiscreteFunction>& source = std::nullopt,
                             const std::optional<DiscreteFunction>& initial = std::nullopt);

/// Minimizes the p-energy E^(p) over g + H_0(Omega). The objective is E^(p)(u).
SolverResult solve_p_dirichlet(const EnergyModel& model, double p, const DiscreteFunction& g, const Region& omega,
                               const SolverConfig& cfg);

SolverResult solve_anisotropic(const EnergyModel& model, double p, const DiscreteFunction& g, const Region& omega,
                               const SolverConfig& cfg);

/// Minimizes E^(p) over {w in g + H_0(Omega) : J[w] = 0} by an augmented
/// Lagrangian method and reports the multiplier lambda of
///   E^(p)(u, v) = lambda sum_i mu_i G'(u(i)) v(i)  for all v in H_0(Omega).
SolverResult solve_constrained_poisson(const EnergyModel& model, double p, const ConstraintSpec& spec,
                                       const DiscreteFunction& g, const Region& omega, const SolverConfig& cfg);

/// Minimizes 1/2 E(w) - sum_i mu_i f(i) w(i) over {w in g + H_0(Omega) : w >= h}.
SolverResult solve_obstacle(const EnergyModel& model, const ObstacleSpec& spec, const Region& omega,
                            const SolverConfig& cfg, const std::optional<DiscreteFunction>& initial = std::nullopt);

/// min over sampled admissible w of E(u, w - u) - sum_i mu_i f(i) (w - u)(i);
/// nonnegative for the obstacle minimizer.
double obstacle_inequality_margin(const EnergyModel& model, const ObstacleSpec& spec, const Region& omega,
                                  const DiscreteFunction& u, int samples = 100, std::uint64_t seed = 0);

/// Smallest c with |u|_p^p <= c E^(p)(u) for u in H_0(Omega).
double poincare_constant(const EnergyModel& model, const Region& omega, double p);

/// max over hat functions phi_i (i in Omega, at most max_tests chosen by seed)
/// of |E^(p)(u, phi_i)| / |phi_i|_H.
double euler_lagrange_residual(const EnergyModel& model, const DiscreteFunction& u, double p, const Region& omega,
                               int max_tests = 500, std::uint64_t seed = 0);

/// |phi_i|_H = |phi_i|_{L^p(mu)} + E^(p)(phi_i)^{1/p} for every dof.
Eigen::VectorXd hat_norms(const EnergyModel& model, double p);

/// The interior test dofs used by residual checks: all of Omega, or a seeded
/// sample of max_tests of them in increasing order.
std::vector<int> test_dofs(const Region& omega, int max_tests, std::uint64_t seed);

/// Returns false when some nonzero w in H_0(Omega) has zero energy on the
/// fibers selected by the predicate (no Poincare inequality).
bool dirichlet_form_definite(const EnergyModel& model, const Region& omega,
                             const std::function<bool(const Fiber&)>& fibers = {});

}  // namespace fracvar

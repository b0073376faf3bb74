#pragma once

// Limited-memory BFGS with monotone Armijo backtracking, used by the solvers
// for smooth unconstrained subproblems over the free dofs.

#include <functional>

#include <Eigen/Core>

namespace fracvar::detail {

enum class DescentStatus { converged, max_iterations, stalled };

struct DescentOptions {
  double tolerance = 1e-8;
  int max_iterations = 100000;
  int memory = 10;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
};

struct DescentOutcome {
  Eigen::VectorXd x;
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  DescentStatus status = DescentStatus::max_iterations;
};

struct SmoothProblem {
  /// Objective value; writes the gradient when grad is non-null.
  std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)> evaluate;
  /// Stopping measure computed from the gradient.
  std::function<double(const Eigen::VectorXd& grad)> residual;
};

/// Called after every accepted iterate (and once for the start point with
/// iteration 0).
using TraceCallback = std::function<void(int iteration, double value, double residual)>;

/// Throws SolverError when the objective decreases without bound along a
/// direction of zero curvature.
DescentOutcome lbfgs_minimize(const SmoothProblem& problem, Eigen::VectorXd x0, const DescentOptions& options,
                              const TraceCallback& trace);

}  // namespace fracvar::detail

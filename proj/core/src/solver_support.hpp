#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "fracvar/energy_model.hpp"
#include "fracvar/solvers.hpp"
#include "lbfgs.hpp"

namespace fracvar::detail {

/// Coordinates on g + H_0(Omega): x holds the values at the free dofs.
struct FreeSpace {
  std::vector<int> free;
  DiscreteFunction base;
  Eigen::VectorXd mass;  // mu restricted to the free dofs

  Eigen::Index size() const { return static_cast<Eigen::Index>(free.size()); }
  DiscreteFunction embed(const Eigen::VectorXd& x) const;
  Eigen::VectorXd restrict(const DiscreteFunction& u) const;
  /// max_i |grad_i| / mu_i.
  double residual(const Eigen::VectorXd& grad) const;
};

/// Throws InputError on size mismatch or an empty region.
FreeSpace make_free_space(const EnergyModel& model, const DiscreteFunction& g, const Region& omega);

/// sum_x m_x f_x(d_x u) - sum_i mu_i s(i) u(i) and, when grad is non-null,
/// its gradient with respect to all dof values.
double integrand_objective(const EnergyModel& model, const ConvexIntegrand& integrand, const DiscreteFunction& u,
                           double eps, const DiscreteFunction* source, DiscreteFunction* grad);

SolverStatus to_solver_status(DescentStatus status);

void check_function_size(const EnergyModel& model, const DiscreteFunction& f, const std::string& what);

}  // namespace fracvar::detail

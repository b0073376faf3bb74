#pragma once

// Differential calculus on an EnergyModel: gradients, carre du champ, p-energies,
// divergence, generator and the L^p structures on functions and fields.
//
// Functions are paired against the lumped dof measure mu (EnergyModel::dof_mass),
// fields against the fiber weights m_x. The divergence is the adjoint of the
// gradient for these pairings:
//   sum_x m_x <d_x phi, v_x> = sum_i mu_i phi(i) (d* v)(i).

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fracvar/energy_model.hpp"

namespace fracvar {

/// Throws InputError unless 1 < p < infinity.
void check_exponent(double p);

/// d_x f as a vector of length dim(H_x).
Eigen::VectorXd fiber_gradient(const EnergyModel& model, const DiscreteFunction& f, int fiber_id);

/// All fiber gradients, flattened.
FiberVectorField gradient(const EnergyModel& model, const DiscreteFunction& f);

/// Gamma(f)(x) = |d_x f|^2.
double carre_density(const EnergyModel& model, const DiscreteFunction& f, int fiber_id);
/// Gamma(f, g)(x) = <d_x f, d_x g>.
double carre_density(const EnergyModel& model, const DiscreteFunction& f, const DiscreteFunction& g, int fiber_id);
/// Gamma(f) on every fiber.
Eigen::VectorXd carre_field(const EnergyModel& model, const DiscreteFunction& f);

/// Base bilinear form E(f, g) = sum_x m_x Gamma(f, g)(x).
double energy(const EnergyModel& model, const DiscreteFunction& f, const DiscreteFunction& g);

/// E^(p)(f) = sum_x m_x (Gamma(f)(x) + eps^2)^{p/2}. eps = 0 is the p-energy
/// proper; eps > 0 is the smoothed energy used by the solvers for p < 2.
double p_energy(const EnergyModel& model, const DiscreteFunction& f, double p, double eps = 0.0);

/// E^(p)(u, phi) = sum_x m_x (|d_x u|^2 + eps^2)^{(p-2)/2} <d_x u, d_x phi>.
/// With eps = 0, fibers where d_x u = 0 contribute 0.
double p_energy_bilinear(const EnergyModel& model, const DiscreteFunction& u, const DiscreteFunction& phi, double p,
                         double eps = 0.0);

/// Euclidean gradient of f -> p_energy(f, p, eps) with respect to dof values:
/// p * G^T (weighted flux).
DiscreteFunction functional_gradient(const EnergyModel& model, const DiscreteFunction& f, double p, double eps = 0.0);

/// Per-row coefficients m_x (|d_x u|^2 + eps^2)^{(p-2)/2} d_x u, so that
/// E^(p)(u, phi) = flux . (G phi).
FiberVectorField p_flux(const EnergyModel& model, const FiberVectorField& grad, double p, double eps = 0.0);

/// Sparse K = G^T diag(m) G with E(f, g) = f^T K g.
Eigen::SparseMatrix<double> stiffness_matrix(const EnergyModel& model);

/// Discrete divergence d* v (a density with respect to mu). Dofs of zero mass
/// get 0; their gradient columns are empty.
DiscreteFunction divergence(const EnergyModel& model, const FiberVectorField& v);

/// L f = -d* d f on non-boundary dofs, 0 on boundary dofs.
DiscreteFunction generator_apply(const EnergyModel& model, const DiscreteFunction& f);

/// (sum_x m_x |v_x|^p)^{1/p}.
double lp_field_norm(const EnergyModel& model, const FiberVectorField& v, double p);

/// sum_x m_x <u_x, v_x>.
double dual_pairing(const EnergyModel& model, const FiberVectorField& u, const FiberVectorField& v);

/// |v_x| on every fiber.
Eigen::VectorXd fiber_norms(const EnergyModel& model, const FiberVectorField& v);

/// (sum_i mu_i |f(i)|^p)^{1/p}.
double lp_norm(const EnergyModel& model, const DiscreteFunction& f, double p);

/// |f|_{L^p(mu)} + E^(p)(f)^{1/p}.
double sobolev_norm(const EnergyModel& model, const DiscreteFunction& f, double p);

/// sum_i mu_i f(i) g(i).
double integrate(const EnergyModel& model, const DiscreteFunction& f, const DiscreteFunction& g);

/// Fiber value of a function: the mean of g over the dofs its gradient map touches.
Eigen::VectorXd fiber_average(const EnergyModel& model, const DiscreteFunction& g);

/// Module action (g v)_x = g_x v_x with g_x = fiber_average(g)_x.
FiberVectorField multiply(const EnergyModel& model, const DiscreteFunction& g, const FiberVectorField& v);

/// (0 v f) ^ 1.
DiscreteFunction unit_clamp(const DiscreteFunction& f);

/// Field u_x = |v_x|^{q-2} v_x attaining sup <v, u> / |u|_p = |v|_q, where
/// 1/p + 1/q = 1. Fibers with v_x = 0 get 0.
FiberVectorField attaining_field(const EnergyModel& model, const FiberVectorField& v, double p);

}  // namespace fracvar

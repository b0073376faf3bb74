#include "fracvar/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fracvar/errors.hpp"

namespace fracvar {

namespace {

void check_function(const EnergyModel& model, const DiscreteFunction& f, const char* what) {
  if (f.size() != model.dof_count()) {
    throw InputError(std::string(what) + " has " + std::to_string(f.size()) + " values, model has " +
                     std::to_string(model.dof_count()) + " dofs");
  }
}

void check_field(const EnergyModel& model, const FiberVectorField& v, const char* what) {
  if (v.size() != model.component_count()) {
    throw InputError(std::string(what) + " has " + std::to_string(v.size()) + " components, model has " +
                     std::to_string(model.component_count()));
  }
}

// (s + eps^2)^{(p-2)/2} for a squared norm s, with the 0-contributes-0 convention.
double flux_factor(double s, double p, double eps) {
  const double r = s + eps * eps;
  if (p == 2.0) return 1.0;
  if (r == 0.0) return 0.0;
  return std::pow(r, 0.5 * (p - 2.0));
}

// Rows annihilate constants, so sum_k a_k f_k = sum_k a_k (f_k - f_first).
// The difference form makes d(constant) exactly zero, which matters for
// the singular flux |v|^{p-2} v at p < 2.
double row_difference(const GradientMatrix& G, Eigen::Index row, const DiscreteFunction& f) {
  GradientMatrix::InnerIterator it(G, row);
  if (!it) return 0.0;
  const double base = f[it.col()];
  double s = 0.0;
  for (; it; ++it) s += it.value() * (f[it.col()] - base);
  return s;
}

}  // namespace

void check_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InputError("exponent p = " + std::to_string(p) + " not in (1, inf)");
}

Eigen::VectorXd fiber_gradient(const EnergyModel& model, const DiscreteFunction& f, int fiber_id) {
  check_function(model, f, "function");
  const auto& x = model.fiber(fiber_id);
  const auto& G = model.gradient_matrix();
  Eigen::VectorXd out(x.dim);
  for (int r = 0; r < x.dim; ++r) out[r] = row_difference(G, x.offset + r, f);
  return out;
}

FiberVectorField gradient(const EnergyModel& model, const DiscreteFunction& f) {
  check_function(model, f, "function");
  const auto& G = model.gradient_matrix();
  FiberVectorField out(G.rows());
  for (Eigen::Index r = 0; r < G.rows(); ++r) out[r] = row_difference(G, r, f);
  return out;
}

double carre_density(const EnergyModel& model, const DiscreteFunction& f, int fiber_id) {
  return fiber_gradient(model, f, fiber_id).squaredNorm();
}

double carre_density(const EnergyModel& model, const DiscreteFunction& f, const DiscreteFunction& g, int fiber_id) {
  return fiber_gradient(model, f, fiber_id).dot(fiber_gradient(model, g, fiber_id));
}

Eigen::VectorXd carre_field(const EnergyModel& model, const DiscreteFunction& f) {
  const FiberVectorField grad = gradient(model, f);
  Eigen::VectorXd out(model.fiber_count());
  for (const auto& x : model.fibers()) out[x.id] = grad.segment(x.offset, x.dim).squaredNorm();
  return out;
}

double energy(const EnergyModel& model, const DiscreteFunction& f, const DiscreteFunction& g) {
  const FiberVectorField a = gradient(model, f);
  const FiberVectorField b = gradient(model, g);
  return (model.component_weights().array() * a.array() * b.array()).sum();
}

double p_energy(const EnergyModel& model, const DiscreteFunction& f, double p, double eps) {
  check_exponent(p);
  const FiberVectorField grad = gradient(model, f);
  double total = 0.0;
  for (const auto& x : model.fibers()) {
    const double s = grad.segment(x.offset, x.dim).squaredNorm() + eps * eps;
    total += x.weight * (p == 2.0 ? s : std::pow(s, 0.5 * p));
  }
  return total;
}

FiberVectorField p_flux(const EnergyModel& model, const FiberVectorField& grad, double p, double eps) {
  check_exponent(p);
  check_field(model, grad, "gradient field");
  FiberVectorField out(grad.size());
  for (const auto& x : model.fibers()) {
    const auto g = grad.segment(x.offset, x.dim);
    out.segment(x.offset, x.dim) = (x.weight * flux_factor(g.squaredNorm(), p, eps)) * g;
  }
  return out;
}

double p_energy_bilinear(const EnergyModel& model, const DiscreteFunction& u, const DiscreteFunction& phi, double p,
                         double eps) {
  check_function(model, phi, "test function");
  return p_flux(model, gradient(model, u), p, eps).dot(gradient(model, phi));
}

DiscreteFunction functional_gradient(const EnergyModel& model, const DiscreteFunction& f, double p, double eps) {
  const FiberVectorField flux = p_flux(model, gradient(model, f), p, eps);
  return p * (model.gradient_matrix().transpose() * flux);
}

Eigen::SparseMatrix<double> stiffness_matrix(const EnergyModel& model) {
  const auto& G = model.gradient_matrix();
  Eigen::SparseMatrix<double> Gc = G;
  Eigen::SparseMatrix<double> K = Gc.transpose() * model.component_weights().asDiagonal() * Gc;
  K.makeCompressed();
  return K;
}

DiscreteFunction divergence(const EnergyModel& model, const FiberVectorField& v) {
  check_field(model, v, "vector field");
  const Eigen::VectorXd weighted = model.component_weights().cwiseProduct(v);
  DiscreteFunction out = model.gradient_matrix().transpose() * weighted;
  const auto& mu = model.dof_mass();
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = mu[i] > 0.0 ? out[i] / mu[i] : 0.0;
  return out;
}

DiscreteFunction generator_apply(const EnergyModel& model, const DiscreteFunction& f) {
  DiscreteFunction out = -divergence(model, gradient(model, f));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (model.is_boundary(static_cast<int>(i))) out[i] = 0.0;
  }
  return out;
}

double lp_field_norm(const EnergyModel& model, const FiberVectorField& v, double p) {
  check_exponent(p);
  check_field(model, v, "vector field");
  double total = 0.0;
  for (const auto& x : model.fibers()) total += x.weight * std::pow(v.segment(x.offset, x.dim).norm(), p);
  return std::pow(total, 1.0 / p);
}

double dual_pairing(const EnergyModel& model, const FiberVectorField& u, const FiberVectorField& v) {
  check_field(model, u, "first field");
  check_field(model, v, "second field");
  return (model.component_weights().array() * u.array() * v.array()).sum();
}

Eigen::VectorXd fiber_norms(const EnergyModel& model, const FiberVectorField& v) {
  check_field(model, v, "vector field");
  Eigen::VectorXd out(model.fiber_count());
  for (const auto& x : model.fibers()) out[x.id] = v.segment(x.offset, x.dim).norm();
  return out;
}

double lp_norm(const EnergyModel& model, const DiscreteFunction& f, double p) {
  check_exponent(p);
  check_function(model, f, "function");
  return std::pow((model.dof_mass().array() * f.array().abs().pow(p)).sum(), 1.0 / p);
}

double sobolev_norm(const EnergyModel& model, const DiscreteFunction& f, double p) {
  return lp_norm(model, f, p) + std::pow(p_energy(model, f, p), 1.0 / p);
}

double integrate(const EnergyModel& model, const DiscreteFunction& f, const DiscreteFunction& g) {
  check_function(model, f, "first function");
  check_function(model, g, "second function");
  return (model.dof_mass().array() * f.array() * g.array()).sum();
}

Eigen::VectorXd fiber_average(const EnergyModel& model, const DiscreteFunction& g) {
  check_function(model, g, "function");
  Eigen::VectorXd out(model.fiber_count());
  for (const auto& x : model.fibers()) {
    const auto& dofs = model.fiber_dofs(x.id);
    double s = 0.0;
    for (int d : dofs) s += g[d];
    out[x.id] = s / static_cast<double>(dofs.size());
  }
  return out;
}

FiberVectorField multiply(const EnergyModel& model, const DiscreteFunction& g, const FiberVectorField& v) {
  check_field(model, v, "vector field");
  const Eigen::VectorXd gx = fiber_average(model, g);
  FiberVectorField out(v.size());
  for (const auto& x : model.fibers()) out.segment(x.offset, x.dim) = gx[x.id] * v.segment(x.offset, x.dim);
  return out;
}

DiscreteFunction unit_clamp(const DiscreteFunction& f) { return f.cwiseMax(0.0).cwiseMin(1.0); }

FiberVectorField attaining_field(const EnergyModel& model, const FiberVectorField& v, double p) {
  check_exponent(p);
  check_field(model, v, "vector field");
  const double q = p / (p - 1.0);
  FiberVectorField out(v.size());
  for (const auto& x : model.fibers()) {
    const auto vx = v.segment(x.offset, x.dim);
    const double n = vx.norm();
    out.segment(x.offset, x.dim) = n > 0.0 ? Eigen::VectorXd(std::pow(n, q - 2.0) * vx) : Eigen::VectorXd::Zero(x.dim);
  }
  return out;
}

}  // namespace fracvar

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/IterativeLinearSolvers>

#include "fracvar/calculus.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/solvers.hpp"
#include "solver_support.hpp"

namespace fracvar {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Rows and columns of K selected by a 0/1 index map (new index or -1).
SpMat principal_submatrix(const SpMat& K, const std::vector<int>& index, int size) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index c = 0; c < K.outerSize(); ++c) {
    const int cc = index[static_cast<std::size_t>(c)];
    if (cc < 0) continue;
    for (SpMat::InnerIterator it(K, c); it; ++it) {
      const int rr = index[static_cast<std::size_t>(it.row())];
      if (rr >= 0) triplets.emplace_back(rr, cc, it.value());
    }
  }
  SpMat out(size, size);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// Quadratic model q(x) = 1/2 x^T A x - b^T x over the free dofs with lower
// bounds x >= l.
struct BoundQuadratic {
  SpMat A;
  Eigen::VectorXd b;
  Eigen::VectorXd lower;
  Eigen::VectorXd mass;

  double value(const Eigen::VectorXd& x) const { return 0.5 * x.dot(A * x) - b.dot(x); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return A * x - b; }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return x.cwiseMax(lower); }

  Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] <= lower[i]) pg[i] = std::min(g[i], 0.0);
    }
    return pg;
  }

  double residual(const Eigen::VectorXd& pg) const {
    double r = 0.0;
    for (Eigen::Index i = 0; i < pg.size(); ++i) r = std::max(r, std::abs(pg[i]) / mass[i]);
    return r;
  }
};

// Backtracking along the projected path x(t) = P(x + t d). Returns false if no
// sufficient decrease was found.
bool projected_search(const BoundQuadratic& q, const Eigen::VectorXd& d, double t, double armijo, double backtrack,
                      Eigen::VectorXd& x, double& fx, const Eigen::VectorXd& g) {
  for (int k = 0; k < 60; ++k, t *= backtrack) {
    const Eigen::VectorXd xn = q.project(x + t * d);
    const Eigen::VectorXd step = xn - x;
    const double decrease = g.dot(step);
    if (!(decrease < 0.0)) continue;
    // q(x + s) - q(x) evaluated without cancellation.
    const double delta = decrease + 0.5 * step.dot(q.A * step);
    if (delta <= armijo * decrease) {
      x = xn;
      fx += delta;
      return true;
    }
  }
  return false;
}

}  // namespace

SolverResult solve_obstacle(const EnergyModel& model, const ObstacleSpec& spec, const Region& omega,
                            const SolverConfig& cfg, const std::optional<DiscreteFunction>& initial) {
  SolverConfig c = cfg;
  c.p = 2.0;
  c.validate();
  detail::check_function_size(model, spec.obstacle, "obstacle");
  detail::check_function_size(model, spec.source, "source");
  const detail::FreeSpace fs = detail::make_free_space(model, spec.boundary, omega);
  for (Eigen::Index i = 0; i < model.dof_count(); ++i) {
    if (!omega.contains(static_cast<int>(i)) && spec.boundary[i] < spec.obstacle[i]) {
      throw InputError("obstacle problem is infeasible: datum " + std::to_string(spec.boundary[i]) +
                       " lies below the obstacle " + std::to_string(spec.obstacle[i]) + " at fixed dof " +
                       std::to_string(i));
    }
  }
  if (initial) detail::check_function_size(model, *initial, "initial guess");
  const double tolerance = c.effective_tolerance();

  const SpMat K = stiffness_matrix(model);
  std::vector<int> index(static_cast<std::size_t>(model.dof_count()), -1);
  for (std::size_t k = 0; k < fs.free.size(); ++k) index[static_cast<std::size_t>(fs.free[k])] = static_cast<int>(k);

  BoundQuadratic q;
  q.A = principal_submatrix(K, index, static_cast<int>(fs.size()));
  DiscreteFunction fixed = spec.boundary;
  for (int d : fs.free) fixed[d] = 0.0;
  const Eigen::VectorXd coupling = K * fixed;
  q.b.resize(fs.size());
  q.lower.resize(fs.size());
  for (std::size_t k = 0; k < fs.free.size(); ++k) {
    const int d = fs.free[k];
    const auto i = static_cast<Eigen::Index>(k);
    q.b[i] = model.dof_mass()[d] * spec.source[d] - coupling[d];
    q.lower[i] = spec.obstacle[d];
  }
  q.mass = fs.mass;

  const auto full_objective = [&](const Eigen::VectorXd& x) {
    const DiscreteFunction w = fs.embed(x);
    return 0.5 * energy(model, w, w) - integrate(model, spec.source, w);
  };

  SolverResult result;
  result.problem = "obstacle";
  Eigen::VectorXd x = q.project(fs.restrict(initial ? *initial : spec.boundary));
  double fx = q.value(x);
  // Offset between I and q; adding it to q keeps the trace exactly monotone.
  const double offset = full_objective(x) - fx;
  Eigen::VectorXd g = q.gradient(x);
  double r = q.residual(q.projected_gradient(x, g));
  result.trace.push_back({0, 0, fx + offset, r});

  int k = 0;
  result.status = SolverStatus::max_iterations;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  while (true) {
    if (r <= tolerance) {
      result.status = SolverStatus::converged;
      break;
    }
    if (k >= c.max_iterations) break;

    // Projected gradient step, started at the exact minimizing step along the
    // projected gradient.
    const Eigen::VectorXd pg = q.projected_gradient(x, g);
    const double curvature = pg.dot(q.A * pg);
    const double t0 = curvature > 0.0 ? pg.squaredNorm() / curvature : 1.0;
    const bool moved = projected_search(q, -g, t0, c.armijo, c.backtrack, x, fx, g);
    if (moved) {
      g = q.gradient(x);
      r = q.residual(q.projected_gradient(x, g));
      result.trace.push_back({++k, 0, fx + offset, r});
      if (r <= tolerance) continue;
    }

    // Newton step on the face {x_i = l_i for active i}, solved by CG.
    std::vector<int> face(static_cast<std::size_t>(x.size()), -1);
    int n_face = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] > q.lower[i]) face[static_cast<std::size_t>(i)] = n_face++;
    }
    if (n_face == 0) {
      if (moved) continue;
      result.status = SolverStatus::stalled;
      break;
    }
    const SpMat A_face = principal_submatrix(q.A, face, n_face);
    Eigen::VectorXd rhs(n_face);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (face[static_cast<std::size_t>(i)] >= 0) rhs[face[static_cast<std::size_t>(i)]] = -g[i];
    }
    cg.setMaxIterations(std::max(10, 10 * n_face));
    cg.compute(A_face);
    const Eigen::VectorXd z = cg.solve(rhs);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (face[static_cast<std::size_t>(i)] >= 0) d[i] = z[face[static_cast<std::size_t>(i)]];
    }
    if (projected_search(q, d, 1.0, c.armijo, c.backtrack, x, fx, g)) {
      g = q.gradient(x);
      r = q.residual(q.projected_gradient(x, g));
      result.trace.push_back({++k, 0, fx + offset, r});
    } else if (!moved) {
      result.status = SolverStatus::stalled;
      break;
    }
  }

  result.u = fs.embed(x);
  result.objective = full_objective(x);
  result.residual = r;
  result.iterations = k;
  int contact = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) contact += x[i] <= q.lower[i] ? 1 : 0;
  result.diagnostics["contact_count"] = contact;
  result.diagnostics["min_gap"] = (result.u - spec.obstacle).minCoeff();
  return result;
}

double obstacle_inequality_margin(const EnergyModel& model, const ObstacleSpec& spec, const Region& omega,
                                  const DiscreteFunction& u, int samples, std::uint64_t seed) {
  detail::check_function_size(model, u, "solution");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double scales[] = {1e-3, 1e-1, 1.0, 10.0};
  double margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    DiscreteFunction w = u;
    const double scale = scales[s % 4];
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (omega.contains(static_cast<int>(i))) w[i] = std::max(u[i] + scale * normal(rng), spec.obstacle[i]);
    }
    const DiscreteFunction diff = w - u;
    margin = std::min(margin, energy(model, u, diff) - integrate(model, spec.source, diff));
  }
  return margin;
}

}  // namespace fracvar

#include "lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "fracvar/errors.hpp"

namespace fracvar::detail {

namespace {

struct Memory {
  std::deque<Eigen::VectorXd> s, y;
  std::deque<double> rho;

  void clear() {
    s.clear();
    y.clear();
    rho.clear();
  }
  bool empty() const { return s.empty(); }

  void push(Eigen::VectorXd sk, Eigen::VectorXd yk, double sy, int capacity) {
    s.push_back(std::move(sk));
    y.push_back(std::move(yk));
    rho.push_back(1.0 / sy);
    if (static_cast<int>(s.size()) > capacity) {
      s.pop_front();
      y.pop_front();
      rho.pop_front();
    }
  }

  // Two-loop recursion: returns -H g.
  Eigen::VectorXd direction(const Eigen::VectorXd& g) const {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s.size());
    for (std::size_t i = s.size(); i-- > 0;) {
      alpha[i] = rho[i] * s[i].dot(q);
      q -= alpha[i] * y[i];
    }
    const double gamma = s.back().dot(y.back()) / y.back().squaredNorm();
    q *= gamma;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double beta = rho[i] * y[i].dot(q);
      q += (alpha[i] - beta) * s[i];
    }
    return -q;
  }
};

// Zero curvature along s with decreasing values: march out geometrically and
// report an unbounded objective if it keeps falling far below its start.
void probe_unbounded(const SmoothProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& s, double fx) {
  double previous = fx;
  const double floor = fx - 1e12 * (1.0 + std::abs(fx));
  double scale = 2.0;
  for (int j = 0; j < 80; ++j, scale *= 2.0) {
    const double f = problem.evaluate(x + scale * s, nullptr);
    if (!std::isfinite(f) || f < floor) {
      throw SolverError("objective is unbounded below along a descent direction (value " + std::to_string(f) +
                        " after step scale " + std::to_string(scale) + "); the integrand is not coercive here");
    }
    if (f >= previous) return;
    previous = f;
  }
}

// Change of the objective over a step t d. Near the minimum the difference
// of two evaluations is pure rounding; there the trapezoid rule on the
// directional derivatives gives the change without cancellation.
double decrease(double f_old, double f_new, double t, double slope_old, double slope_new) {
  const double direct = f_new - f_old;
  if (std::abs(direct) > 1e-10 * (1.0 + std::abs(f_old))) return direct;
  return 0.5 * t * (slope_old + slope_new);
}

}  // namespace

DescentOutcome lbfgs_minimize(const SmoothProblem& problem, Eigen::VectorXd x, const DescentOptions& options,
                              const TraceCallback& trace) {
  const Eigen::Index n = x.size();
  DescentOutcome out;
  Eigen::VectorXd g(n);
  double f_raw = problem.evaluate(x, &g);
  if (!std::isfinite(f_raw)) throw SolverError("objective is not finite at the initial point");
  // f is the tracked objective: the initial value plus the accepted changes.
  double f = f_raw;
  double r = problem.residual(g);
  if (trace) trace(0, f, r);

  Memory memory;
  int flat_steps = 0;
  int k = 0;
  out.status = DescentStatus::max_iterations;
  while (true) {
    if (r <= options.tolerance) {
      out.status = DescentStatus::converged;
      break;
    }
    if (k >= options.max_iterations) break;

    Eigen::VectorXd d;
    const double steepest_scale = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
    if (memory.empty()) {
      d = -steepest_scale * g;
    } else {
      d = memory.direction(g);
    }
    double gd = g.dot(d);
    if (!(gd < 0.0)) {
      memory.clear();
      d = -steepest_scale * g;
      gd = g.dot(d);
      if (!(gd < 0.0)) {
        out.status = DescentStatus::stalled;
        break;
      }
    }

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn(n), gn(n);
    double fn = 0.0, fn_raw = 0.0;
    // Best non-increasing trial, used when the Armijo test keeps failing.
    Eigen::VectorXd x_fallback, g_fallback;
    double f_fallback = f, f_fallback_raw = f_raw;
    double r_fallback = r;
    for (int b = 0; b < options.max_backtracks; ++b, t *= options.backtrack) {
      xn = x + t * d;
      fn_raw = problem.evaluate(xn, &gn);
      if (!std::isfinite(fn_raw)) continue;
      const double change = decrease(f_raw, fn_raw, t, gd, gn.dot(d));
      fn = f + change;
      if (change <= options.armijo * t * gd) {
        accepted = true;
        break;
      }
      if (change <= 0.0) {
        const double rn = problem.residual(gn);
        if (rn < r_fallback) {
          x_fallback = xn;
          g_fallback = gn;
          f_fallback = fn;
          f_fallback_raw = fn_raw;
          r_fallback = rn;
        }
      }
    }
    if (!accepted) {
      if (x_fallback.size() == n) {
        xn = std::move(x_fallback);
        gn = std::move(g_fallback);
        fn = f_fallback;
        fn_raw = f_fallback_raw;
      } else if (!memory.empty()) {
        memory.clear();
        continue;
      } else {
        out.status = DescentStatus::stalled;
        break;
      }
    }

    Eigen::VectorXd s = xn - x;
    Eigen::VectorXd y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      memory.push(s, std::move(y), sy, options.memory);
      flat_steps = 0;
    } else if (fn < f) {
      if (++flat_steps >= 3) {
        probe_unbounded(problem, xn, s, fn_raw);
        flat_steps = 0;
      }
    }

    x = std::move(xn);
    g = std::move(gn);
    f = fn;
    f_raw = fn_raw;
    r = problem.residual(g);
    ++k;
    if (trace) trace(k, f, r);
  }
  out.x = std::move(x);
  out.value = f;
  out.residual = r;
  out.iterations = k;
  return out;
}

}  // namespace fracvar::detail

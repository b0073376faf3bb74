#include "fracvar/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <thread>

#include "fracvar/calculus.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/sierpinski.hpp"

namespace fracvar {

namespace {

using Rng = std::mt19937_64;

DiscreteFunction random_function(const EnergyModel& model, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  DiscreteFunction f(model.dof_count());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = normal(rng);
  return f;
}

FiberVectorField random_field(const EnergyModel& model, Rng& rng) {
  std::normal_distribution<double> normal;
  FiberVectorField v(model.component_count());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return v;
}

CheckReport make_report(std::string name, const EnergyModel* model, std::uint64_t seed, std::string kind,
                        double tolerance) {
  CheckReport r;
  r.name = std::move(name);
  if (model) r.model = model->name();
  r.seed = seed;
  r.kind = std::move(kind);
  r.tolerance = tolerance;
  r.worst_margin = std::numeric_limits<double>::infinity();
  return r;
}

void finish(CheckReport& r) { r.pass = r.worst_margin >= -r.tolerance; }

double median(std::vector<double> values) {
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

std::string exponent_suffix(double p) {
  std::string s = std::to_string(p);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return "(p=" + s + ")";
}

}  // namespace

CheckReport check_markov(const EnergyModel& model, int samples, std::uint64_t seed, double p) {
  check_exponent(p);
  auto r = make_report("markov" + exponent_suffix(p), &model, seed, "sampled", 1e-12);
  Rng rng(seed);
  r.columns = {"sample", "energy", "clamped_energy", "margin"};
  for (int s = 0; s < samples; ++s) {
    const DiscreteFunction f = random_function(model, rng);
    const double e = p_energy(model, f, p);
    const double ec = p_energy(model, unit_clamp(f), p);
    const double margin = (e - ec) / (1.0 + e);
    r.worst_margin = std::min(r.worst_margin, margin);
    if (s < 10) r.rows.push_back({static_cast<double>(s), e, ec, margin});
  }
  r.samples = samples;
  finish(r);
  return r;
}

CheckReport check_clarkson(const EnergyModel& model, double p, int samples, std::uint64_t seed) {
  check_exponent(p);
  auto r = make_report("clarkson" + exponent_suffix(p), &model, seed, "empirical witness", 0.0);
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double eps_levels[] = {0.5, 1.0, 1.5};
  double max_ratio[3] = {0.0, 0.0, 0.0};
  int counts[3] = {0, 0, 0};
  for (int s = 0; s < samples; ++s) {
    FiberVectorField u = random_field(model, rng);
    u *= (0.75 + 0.25 * unit(rng)) / lp_field_norm(model, u, p);
    FiberVectorField w = random_field(model, rng);
    const double t = unit(rng);
    FiberVectorField v = -t * u + (1.0 - t) * w / lp_field_norm(model, w, p);
    const double nv = lp_field_norm(model, v, p);
    if (!(nv > 0.0)) continue;
    v *= (0.75 + 0.25 * unit(rng)) / nv;

    const double nu_p = std::pow(lp_field_norm(model, u, p), p);
    const double nv_p = std::pow(lp_field_norm(model, v, p), p);
    const double mid_p = std::pow(lp_field_norm(model, 0.5 * (u + v), p), p);
    const double ratio = mid_p / (0.5 * (nu_p + nv_p));
    const double dist = lp_field_norm(model, u - v, p);
    for (int k = 0; k < 3; ++k) {
      if (dist >= eps_levels[k]) {
        ++counts[k];
        max_ratio[k] = std::max(max_ratio[k], ratio);
      }
    }
  }
  r.samples = samples;
  r.columns = {"epsilon", "count", "max_ratio", "delta"};
  for (int k = 0; k < 3; ++k) {
    const double delta = counts[k] > 0 ? 1.0 - max_ratio[k] : -1.0;
    r.rows.push_back({eps_levels[k], static_cast<double>(counts[k]), max_ratio[k], delta});
    r.worst_margin = std::min(r.worst_margin, delta);
  }
  r.pass = r.worst_margin > 0.0;
  return r;
}

CheckReport check_parallelogram(const EnergyModel& model, int samples, std::uint64_t seed) {
  auto r = make_report("parallelogram", &model, seed, "exact", 1e-12);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const FiberVectorField u = random_field(model, rng);
    const FiberVectorField v = random_field(model, rng);
    const double a = std::pow(lp_field_norm(model, 0.5 * (u + v), 2.0), 2) +
                     std::pow(lp_field_norm(model, 0.5 * (u - v), 2.0), 2);
    const double b = 0.5 * (std::pow(lp_field_norm(model, u, 2.0), 2) + std::pow(lp_field_norm(model, v, 2.0), 2));
    r.worst_margin = std::min(r.worst_margin, -std::abs(a - b) / std::max(1.0, b));
  }
  r.samples = samples;
  finish(r);
  return r;
}

CheckReport check_duality(const EnergyModel& model, double p, int samples, std::uint64_t seed) {
  check_exponent(p);
  auto r = make_report("duality" + exponent_suffix(p), &model, seed, "sampled", 1e-10);
  Rng rng(seed);
  const double q = p / (p - 1.0);
  for (int s = 0; s < samples; ++s) {
    FiberVectorField v = random_field(model, rng);
    // Every fourth sample lives on a single fiber.
    if (s % 4 == 3) {
      const auto& x = model.fibers()[static_cast<std::size_t>(s) % model.fibers().size()];
      FiberVectorField single = FiberVectorField::Zero(v.size());
      single.segment(x.offset, x.dim) = v.segment(x.offset, x.dim);
      v = single;
    }
    const FiberVectorField u = attaining_field(model, v, p);
    const double vq = lp_field_norm(model, v, q);
    const double up = lp_field_norm(model, u, p);
    const double attained = up > 0.0 ? dual_pairing(model, v, u) / up : 0.0;
    r.worst_margin = std::min(r.worst_margin, -std::abs(attained - vq) / std::max(1.0, vq));
  }
  r.samples = samples;
  finish(r);
  return r;
}

CheckReport check_polarization(const EnergyModel& model, int samples, std::uint64_t seed) {
  auto r = make_report("polarization", &model, seed, "exact", 1e-12);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const DiscreteFunction f = random_function(model, rng);
    const DiscreteFunction g = random_function(model, rng);
    const FiberVectorField df = gradient(model, f);
    const FiberVectorField dg = gradient(model, g);
    const Eigen::VectorXd plus = carre_field(model, f + g);
    const Eigen::VectorXd minus = carre_field(model, f - g);
    for (const auto& x : model.fibers()) {
      const double mixed = df.segment(x.offset, x.dim).dot(dg.segment(x.offset, x.dim));
      const double polar = 0.25 * (plus[x.id] - minus[x.id]);
      const double scale = std::max(1.0, plus[x.id] + minus[x.id]);
      r.worst_margin = std::min(r.worst_margin, -std::abs(mixed - polar) / scale);
    }
  }
  r.samples = samples;
  finish(r);
  return r;
}

CheckReport check_integration_by_parts(const EnergyModel& model, int samples, std::uint64_t seed) {
  auto r = make_report("integration_by_parts", &model, seed, "sampled", 1e-12);
  Rng rng(seed);
  r.columns = {"sample", "adjointness_defect", "bound_margin"};
  const auto& mu = model.dof_mass();
  for (int s = 0; s < samples; ++s) {
    const DiscreteFunction f = random_function(model, rng);
    const DiscreteFunction g = random_function(model, rng);
    DiscreteFunction phi = random_function(model, rng);
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      if (model.is_boundary(static_cast<int>(i))) phi[i] = 0.0;
    }
    const FiberVectorField v = random_field(model, rng);

    // sum_x m_x <d phi, v> against sum_i mu_i phi (d* v).
    const double lhs = dual_pairing(model, gradient(model, phi), v);
    const double rhs = integrate(model, phi, divergence(model, v));
    const double defect = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));

    const FiberVectorField gdf = multiply(model, g, gradient(model, f));
    const double pairing = std::abs(integrate(model, phi, divergence(model, gdf)));
    const double bound = (g.cwiseAbs().maxCoeff() * generator_apply(model, f).cwiseAbs().maxCoeff() +
                          std::sqrt(carre_field(model, f).maxCoeff() * carre_field(model, g).maxCoeff())) *
                         (mu.array() * phi.array().abs()).sum();
    const double margin = (bound - pairing) / std::max(1.0, bound);

    r.worst_margin = std::min({r.worst_margin, -defect, margin});
    if (s < 10) r.rows.push_back({static_cast<double>(s), defect, margin});
  }
  r.samples = samples;
  finish(r);
  return r;
}

CheckReport rank_decay_report(const std::vector<int>& levels) {
  if (levels.empty()) throw InputError("rank decay report needs at least one level");
  auto r = make_report("rank_decay", nullptr, 0, "sampled", 0.0);
  r.model = "sierpinski";
  r.columns = {"level", "cells", "median_min_eigenvalue", "max_min_eigenvalue"};
  std::vector<double> medians;
  for (int level : levels) {
    if (level < 0 || level > sg::kMaxLevel) {
      throw ResourceError("rank decay level " + std::to_string(level) + " outside [0, " +
                          std::to_string(sg::kMaxLevel) + "]");
    }
    const auto cells = sg::level_cell_data(level);
    std::vector<double> smaller;
    smaller.reserve(cells.size());
    for (const auto& c : cells) smaller.push_back(c.z_eigenvalues[0]);
    const double med = median(smaller);
    medians.push_back(med);
    r.rows.push_back({static_cast<double>(level), static_cast<double>(cells.size()), med,
                      *std::max_element(smaller.begin(), smaller.end())});
    r.samples += static_cast<int>(cells.size());
  }
  r.worst_margin = medians.size() > 1 ? medians.front() - medians.back() : 0.0;
  r.pass = medians.size() > 1 ? medians.back() < medians.front() : true;
  return r;
}

std::vector<CheckReport> run_verification_suite(const EnergyModel& model, const SuiteOptions& options) {
  std::vector<std::function<CheckReport()>> jobs;
  const auto seed = options.seed;
  jobs.emplace_back([&] { return check_markov(model, options.markov_samples, seed, 2.0); });
  for (double p : options.exponents) {
    jobs.emplace_back([&, p] { return check_clarkson(model, p, options.clarkson_samples, seed); });
  }
  jobs.emplace_back([&] { return check_parallelogram(model, options.samples, seed); });
  for (double p : options.exponents) {
    jobs.emplace_back([&, p] { return check_duality(model, p, options.samples, seed); });
  }
  jobs.emplace_back([&] { return check_polarization(model, options.samples, seed); });
  jobs.emplace_back([&] { return check_integration_by_parts(model, options.samples, seed); });
  if (model.spec().kind == ModelKind::sierpinski) {
    jobs.emplace_back([] { return rank_decay_report({2, 3, 4, 5, 6}); });
  }

  std::vector<CheckReport> reports(jobs.size());
  const int workers = std::clamp(options.threads, 1, static_cast<int>(jobs.size()));
  if (workers == 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k) reports[k] = jobs[k]();
    return reports;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < jobs.size(); k = next++) {
        try {
          reports[k] = jobs[k]();
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

}  // namespace fracvar

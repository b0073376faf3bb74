#pragma once

// Sampled and exact checks of the structural inequalities and identities of
// the energy models. Every check is deterministic given its model and seed.

#include <cstdint>
#include <string>
#include <vector>

#include "fracvar/energy_model.hpp"

namespace fracvar {

struct CheckReport {
  std::string name;
  std::string model;
  int samples = 0;
  /// Signed slack of the checked inequality; positive means satisfied.
  double worst_margin = 0.0;
  /// pass == (worst_margin >= -tolerance).
  double tolerance = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  /// "exact", "sampled" or "empirical witness".
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// E^(p)((0 v f) ^ 1) <= E^(p)(f) for Gaussian f; margin relative to 1 + E^(p)(f).
CheckReport check_markov(const EnergyModel& model, int samples = 1000, std::uint64_t seed = 0, double p = 2.0);

/// Empirical modulus of convexity of the L^p field norm: for each
/// eps in {0.5, 1, 1.5} the largest midpoint ratio
///   |(u+v)/2|^p / ((|u|^p + |v|^p) / 2)
/// over sampled pairs with |u|, |v| <= 1 and |u - v| >= eps. Passes when every
/// eps has samples and delta = 1 - max ratio > 0.
CheckReport check_clarkson(const EnergyModel& model, double p, int samples = 2000, std::uint64_t seed = 0);

/// Parallelogram identity of the L^2 field norm (exact).
CheckReport check_parallelogram(const EnergyModel& model, int samples = 100, std::uint64_t seed = 0);

/// Attainment <v, u> / |u|_p = |v|_q for u_x = |v_x|^{q-2} v_x.
CheckReport check_duality(const EnergyModel& model, double p, int samples = 100, std::uint64_t seed = 0);

/// Gamma(f, g) = (Gamma(f + g) - Gamma(f - g)) / 4 on every fiber (exact).
CheckReport check_polarization(const EnergyModel& model, int samples = 100, std::uint64_t seed = 0);

/// Adjointness of divergence and gradient (exact) and the sampled bound
///   |<d phi, g d f>| <= (|g|_inf |L f|_inf + |Gamma f|_inf^{1/2} |Gamma g|_inf^{1/2}) |phi|_1
/// for phi vanishing on the boundary. Rows: (sample, adjointness defect,
/// bound margin).
CheckReport check_integration_by_parts(const EnergyModel& model, int samples = 100, std::uint64_t seed = 0);

/// Per level: cell count, median and max of the smaller eigenvalue of Z_w.
/// Passes when the median at the last level is below the median at the first.
CheckReport rank_decay_report(const std::vector<int>& levels);

struct SuiteOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<double> exponents{1.5, 2.0, 3.0, 4.0};
  int markov_samples = 1000;
  int clarkson_samples = 2000;
  int samples = 100;
};

/// All checks applicable to the model, in a fixed order. Checks run on up to
/// options.threads worker threads; the result order does not depend on it.
std::vector<CheckReport> run_verification_suite(const EnergyModel& model, const SuiteOptions& options);

}  // namespace fracvar

#pragma once

// Run configurations: validation of a Config into a fully resolved problem
// (model, data vectors, region, solver settings) and its execution.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "fracvar/analysis.hpp"
#include "fracvar/energy_model.hpp"
#include "fracvar/sierpinski.hpp"
#include "fracvar/solvers.hpp"

namespace fracvar::cli {

enum class ProblemKind { dirichlet, anisotropic, constrained, obstacle, poincare, verify, measure_table };

std::string_view to_string(ProblemKind kind);
/// Accepts "measure-table" and "measure_table".
std::optional<ProblemKind> parse_problem_kind(std::string_view name);

/// Settings that come from command-line flags rather than the config file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<ProblemKind> problem;
};

struct RunConfig {
  ProblemKind problem = ProblemKind::dirichlet;
  std::optional<EnergyModel> model;  // absent for measure-table
  std::string region_spec = "interior";
  Region region;
  DiscreteFunction boundary;
  DiscreteFunction source;
  DiscreteFunction obstacle;
  std::optional<ConstraintSpec> constraint;
  SolverConfig solver;
  SuiteOptions suite;
  int obstacle_samples = 100;
  int measure_level = 0;
  std::filesystem::path output_dir;  // empty when neither --out nor output.dir is given
  std::uint64_t seed = 0;
  int threads = 1;
  /// Config entries that determine the computation (output location excluded).
  std::map<std::string, std::string> echo;
};

/// Validates every field and resolves data specs against the model. Throws
/// ConfigError (or ResourceError for oversized models) on the first problem.
///
/// Data specs (problem.boundary, problem.source, problem.obstacle):
///   zero | <number> | constant:<c> | corners:<a>,<b>,<c> | linear:<a>,<b>[,<c>[,<d>]]
///   | values:<v0>,<v1>,... | <v0>,<v1>,... | file:<path>
/// Region specs (problem.region): interior | all | <label> | box:<x0>,<x1>[,<y0>,<y1>[,<z0>,<z1>]]
RunConfig prepare(const Config& config, const Overrides& overrides);

/// Builds the model described by the model.* keys.
EnergyModel read_model(const Config& config);

/// Number of worker threads: the flag, else FRACVAR_THREADS, else 1.
int resolve_threads(const std::optional<int>& flag);

struct Outcome {
  std::optional<SolverResult> solution;
  std::vector<CheckReport> checks;
  std::optional<double> poincare;  // empty when the form is not definite on the region
  std::vector<sg::CellEnergyData> table;
};

/// Throws SolverError when the problem has no minimizer or feasible point.
Outcome execute(const RunConfig& run);

/// Throws InputError unless 0 <= level <= sg::kMaxLevel.
std::vector<sg::CellEnergyData> measure_table(int level);

}  // namespace fracvar::cli

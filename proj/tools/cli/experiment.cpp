#include "experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "fracvar/calculus.hpp"

namespace fracvar::cli {

namespace {

constexpr int kMaxThreads = 256;

std::vector<double> numbers(const Config& config, const std::string& key, std::string_view list) {
  std::vector<double> out;
  for (const auto& part : split_list(list)) {
    const auto value = parse_number(part);
    if (!value) config.fail(key, "expected a number, got '" + part + "'");
    out.push_back(*value);
  }
  return out;
}

DiscreteFunction read_data_file(const Config& config, const std::string& key, const std::filesystem::path& path,
                                Eigen::Index expected) {
  std::ifstream in(path);
  if (!in) config.fail(key, "cannot read data file '" + path.string() + "'");
  std::vector<double> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    // The last column holds the value, so a solution.csv can be read back.
    const auto comma = line.rfind(',');
    const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    const auto value = parse_number(field);
    if (!value) {
      if (first) {
        first = false;
        continue;  // header row
      }
      config.fail(key, "non-numeric entry '" + field + "' in '" + path.string() + "'");
    }
    first = false;
    values.push_back(*value);
  }
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    config.fail(key, "file '" + path.string() + "' has " + std::to_string(values.size()) + " values, the model has " +
                         std::to_string(expected) + " dofs");
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), expected);
}

DiscreteFunction resolve_data(const Config& config, const std::string& key, const EnergyModel& model,
                              const std::string& fallback) {
  const std::string text = config.get_string(key, fallback);
  const Eigen::Index n = model.dof_count();
  if (text == "zero") return DiscreteFunction::Zero(n);

  const auto colon = text.find(':');
  const std::string kind = colon == std::string::npos ? "" : text.substr(0, colon);
  const std::string body = colon == std::string::npos ? text : text.substr(colon + 1);

  if (kind.empty()) {
    const auto values = numbers(config, key, body);
    if (values.size() == 1) return DiscreteFunction::Constant(n, values[0]);
    if (static_cast<Eigen::Index>(values.size()) != n) {
      config.fail(key, "expected " + std::to_string(n) + " values, got " + std::to_string(values.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), n);
  }
  if (kind == "constant") {
    const auto values = numbers(config, key, body);
    if (values.size() != 1) config.fail(key, "constant: takes one number");
    return DiscreteFunction::Constant(n, values[0]);
  }
  if (kind == "corners") {
    if (model.spec().kind != ModelKind::sierpinski) config.fail(key, "corners: applies to the sierpinski model only");
    const auto values = numbers(config, key, body);
    if (values.size() != 3) config.fail(key, "corners: takes three numbers");
    DiscreteFunction g = DiscreteFunction::Zero(n);
    for (int i = 0; i < 3; ++i) g[i] = values[static_cast<std::size_t>(i)];
    return g;
  }
  if (kind == "linear") {
    auto values = numbers(config, key, body);
    if (values.size() < 2 || values.size() > 4) config.fail(key, "linear: takes two to four coefficients");
    values.resize(4, 0.0);
    DiscreteFunction g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector3d& x = model.coordinates()[static_cast<std::size_t>(i)];
      g[i] = values[0] + values[1] * x.x() + values[2] * x.y() + values[3] * x.z();
    }
    return g;
  }
  if (kind == "values") {
    const auto values = numbers(config, key, body);
    if (static_cast<Eigen::Index>(values.size()) != n) {
      config.fail(key, "expected " + std::to_string(n) + " values, got " + std::to_string(values.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), n);
  }
  if (kind == "file") {
    std::filesystem::path path(body);
    if (path.is_relative()) path = config.base_dir() / path;
    return read_data_file(config, key, path, n);
  }
  config.fail(key, "unknown data kind '" + kind + "' (expected zero, constant, corners, linear, values or file)");
}

Region resolve_region(const Config& config, const std::string& key, const EnergyModel& model,
                      const std::string& text) {
  if (text == "interior" || text == "all") return model.interior();
  if (text.rfind("box:", 0) == 0) {
    const auto bounds = numbers(config, key, text.substr(4));
    if (bounds.empty() || bounds.size() % 2 != 0 || bounds.size() > 6) {
      config.fail(key, "box: takes 2, 4 or 6 bounds (x0,x1[,y0,y1[,z0,z1]])");
    }
    for (std::size_t k = 0; k < bounds.size(); k += 2) {
      if (bounds[k] > bounds[k + 1]) config.fail(key, "box: lower bound above upper bound");
    }
    return model.region_where([&bounds](const Eigen::Vector3d& x) {
      for (std::size_t k = 0; k < bounds.size(); k += 2) {
        const double c = x[static_cast<Eigen::Index>(k / 2)];
        if (c < bounds[k] || c > bounds[k + 1]) return false;
      }
      return true;
    });
  }
  try {
    return model.region(text);
  } catch (const InputError& e) {
    config.fail(key, e.what());
  }
}

}  // namespace

EnergyModel read_model(const Config& config) {
  ModelSpec spec;
  const std::string name = config.get_string("model.name");
  try {
    spec.kind = parse_model_kind(name);
  } catch (const InputError& e) {
    config.fail("model.name", e.what());
  }
  if (spec.kind == ModelKind::sierpinski || spec.kind == ModelKind::product) {
    spec.level = config.get_int("model.level", spec.level);
  }
  if (spec.kind != ModelKind::sierpinski) spec.cells = config.get_int("model.cells", spec.cells);
  if (spec.kind == ModelKind::sierpinski || spec.kind == ModelKind::product) {
    spec.probability_measure = config.get_bool("model.probability_measure", false);
  }
  try {
    return build_model(spec);
  } catch (const InputError& e) {
    const bool cells = spec.kind != ModelKind::sierpinski && std::string(e.what()).find("cell") != std::string::npos;
    config.fail(cells ? "model.cells" : "model.level", e.what());
  } catch (const ResourceError& e) {
    const bool cells = spec.kind != ModelKind::sierpinski && std::string(e.what()).find("cell") != std::string::npos;
    config.fail(cells ? "model.cells" : "model.level", e.what());
  }
}

namespace {

SolverConfig read_solver(const Config& config, bool require_p) {
  SolverConfig s;
  s.p = require_p ? config.get_double("solver.p") : config.get_double("solver.p", 2.0);
  try {
    check_exponent(s.p);
  } catch (const InputError& e) {
    config.fail("solver.p", e.what());
  }
  s.tolerance = config.get_double("solver.tolerance", s.tolerance);
  s.max_iterations = config.get_int("solver.max_iterations", s.max_iterations);
  s.memory = config.get_int("solver.memory", s.memory);
  s.armijo = config.get_double("solver.armijo", s.armijo);
  s.backtrack = config.get_double("solver.backtrack", s.backtrack);
  s.eps_schedule = config.get_doubles("solver.eps_schedule", s.eps_schedule);
  s.constraint_tolerance = config.get_double("solver.constraint_tolerance", s.constraint_tolerance);
  s.max_test_functions = config.get_int("solver.max_test_functions", s.max_test_functions);
  try {
    s.validate();
  } catch (const InputError& e) {
    throw ConfigError(config.source(), 0, "solver", e.what());
  }
  return s;
}

ConstraintSpec read_constraint(const Config& config, double p) {
  const std::string kind = config.get_string("problem.constraint", "linear");
  ConstraintSpec spec;
  if (kind == "linear") {
    spec = linear_constraint();
  } else if (kind == "cubic") {
    spec = cubic_constraint(config.get_double("problem.constraint_c", 0.5),
                            config.get_double("problem.growth_constant", 10.0));
  } else {
    config.fail("problem.constraint", "unknown constraint '" + kind + "' (expected linear or cubic)");
  }
  try {
    validate_constraint(spec, p);
  } catch (const InputError& e) {
    config.fail("problem.constraint", e.what());
  }
  return spec;
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::dirichlet:
      return "dirichlet";
    case ProblemKind::anisotropic:
      return "anisotropic";
    case ProblemKind::constrained:
      return "constrained";
    case ProblemKind::obstacle:
      return "obstacle";
    case ProblemKind::poincare:
      return "poincare";
    case ProblemKind::verify:
      return "verify";
    case ProblemKind::measure_table:
      return "measure-table";
  }
  return "unknown";
}

std::optional<ProblemKind> parse_problem_kind(std::string_view name) {
  for (auto kind : {ProblemKind::dirichlet, ProblemKind::anisotropic, ProblemKind::constrained, ProblemKind::obstacle,
                    ProblemKind::poincare, ProblemKind::verify, ProblemKind::measure_table}) {
    if (name == to_string(kind)) return kind;
  }
  if (name == "measure_table") return ProblemKind::measure_table;
  return std::nullopt;
}

int resolve_threads(const std::optional<int>& flag) {
  int threads = 1;
  std::string origin = "--threads";
  if (flag) {
    threads = *flag;
  } else if (const char* env = std::getenv("FRACVAR_THREADS"); env != nullptr && *env != '\0') {
    origin = "FRACVAR_THREADS";
    const std::string_view text(env);
    const auto r = std::from_chars(text.data(), text.data() + text.size(), threads);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
      throw ConfigError(origin, 0, "", "expected a positive integer, got '" + std::string(text) + "'");
    }
  }
  if (threads < 1 || threads > kMaxThreads) {
    throw ConfigError(origin, 0, "", "thread count must be in [1, " + std::to_string(kMaxThreads) + "]");
  }
  return threads;
}

RunConfig prepare(const Config& config, const Overrides& overrides) {
  RunConfig run;
  if (overrides.problem) {
    run.problem = *overrides.problem;
  } else {
    const std::string name = config.get_string("problem.type");
    const auto kind = parse_problem_kind(name);
    if (!kind) {
      config.fail("problem.type", "unknown problem '" + name +
                                      "' (expected dirichlet, anisotropic, constrained, obstacle, poincare, verify "
                                      "or measure-table)");
    }
    run.problem = *kind;
  }

  const std::uint64_t configured_seed = config.get_seed("seed", 0);
  run.seed = overrides.seed ? *overrides.seed : configured_seed;
  run.threads = resolve_threads(overrides.threads);
  const std::string configured_dir = config.get_string("output.dir", "");
  run.output_dir = overrides.out ? *overrides.out : std::filesystem::path(configured_dir);

  if (run.problem == ProblemKind::measure_table) {
    run.measure_level = config.get_int("measure.level");
    if (run.measure_level < 0 || run.measure_level > sg::kMaxLevel) {
      config.fail("measure.level", "level must be in [0, " + std::to_string(sg::kMaxLevel) + "]");
    }
  } else {
    run.model = read_model(config);
    const EnergyModel& model = *run.model;
    if (run.problem == ProblemKind::verify) {
      run.suite.seed = run.seed;
      run.suite.threads = run.threads;
      run.suite.exponents = config.get_doubles("verify.exponents", run.suite.exponents);
      for (double p : run.suite.exponents) {
        if (!(p > 1.0)) config.fail("verify.exponents", "exponents must exceed 1");
      }
      run.suite.markov_samples = config.get_int("verify.markov_samples", run.suite.markov_samples);
      run.suite.clarkson_samples = config.get_int("verify.clarkson_samples", run.suite.clarkson_samples);
      run.suite.samples = config.get_int("verify.samples", run.suite.samples);
      if (run.suite.markov_samples < 1) config.fail("verify.markov_samples", "must be positive");
      if (run.suite.clarkson_samples < 1) config.fail("verify.clarkson_samples", "must be positive");
      if (run.suite.samples < 1) config.fail("verify.samples", "must be positive");
    } else {
      const bool quadratic_only = run.problem == ProblemKind::obstacle;
      run.solver = read_solver(config, !quadratic_only);
      run.solver.seed = run.seed;
      if (quadratic_only && run.solver.p != 2.0) config.fail("solver.p", "the obstacle problem is quadratic; p must be 2");

      run.region_spec = config.get_string("problem.region", "interior");
      run.region = resolve_region(config, "problem.region", model, run.region_spec);
      if (run.problem != ProblemKind::poincare) {
        run.boundary = resolve_data(config, "problem.boundary", model, "zero");
      }
      if (run.problem == ProblemKind::constrained) run.constraint = read_constraint(config, run.solver.p);
      if (run.problem == ProblemKind::obstacle) {
        run.source = resolve_data(config, "problem.source", model, "zero");
        config.require("problem.obstacle");
        run.obstacle = resolve_data(config, "problem.obstacle", model, "zero");
        run.obstacle_samples = config.get_int("problem.samples", run.obstacle_samples);
        if (run.obstacle_samples < 1) config.fail("problem.samples", "must be positive");
        for (Eigen::Index i = 0; i < model.dof_count(); ++i) {
          if (!run.region.contains(static_cast<int>(i)) && run.boundary[i] < run.obstacle[i] - 1e-12) {
            config.fail("problem.obstacle", "boundary datum lies below the obstacle at dof " + std::to_string(i));
          }
        }
      }
    }
  }

  config.reject_unused();
  run.echo = config.entries();
  run.echo.erase("output.dir");
  return run;
}

std::vector<sg::CellEnergyData> measure_table(int level) {
  if (level < 0 || level > sg::kMaxLevel) {
    throw InputError("measure table level must be in [0, " + std::to_string(sg::kMaxLevel) + "], got " +
                     std::to_string(level));
  }
  return sg::level_cell_data(level);
}

Outcome execute(const RunConfig& run) {
  Outcome out;
  switch (run.problem) {
    case ProblemKind::measure_table:
      out.table = measure_table(run.measure_level);
      return out;
    case ProblemKind::verify:
      out.checks = run_verification_suite(*run.model, run.suite);
      return out;
    case ProblemKind::poincare: {
      const double c = poincare_constant(*run.model, run.region, run.solver.p);
      if (std::isfinite(c)) out.poincare = c;
      return out;
    }
    case ProblemKind::dirichlet:
      out.solution = solve_p_dirichlet(*run.model, run.solver.p, run.boundary, run.region, run.solver);
      return out;
    case ProblemKind::anisotropic:
      out.solution = solve_anisotropic(*run.model, run.solver.p, run.boundary, run.region, run.solver);
      return out;
    case ProblemKind::constrained:
      out.solution =
          solve_constrained_poisson(*run.model, run.solver.p, *run.constraint, run.boundary, run.region, run.solver);
      return out;
    case ProblemKind::obstacle: {
      const ObstacleSpec spec{run.obstacle, run.source, run.boundary};
      out.solution = solve_obstacle(*run.model, spec, run.region, run.solver);
      out.solution->diagnostics["inequality_margin"] = obstacle_inequality_margin(
          *run.model, spec, run.region, out.solution->u, run.obstacle_samples, run.seed);
      return out;
    }
  }
  return out;
}

}  // namespace fracvar::cli

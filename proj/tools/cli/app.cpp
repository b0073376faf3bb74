#include "app.hpp"

#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "artifacts.hpp"
#include "experiment.hpp"
#include "fracvar/serialize.hpp"

namespace fracvar::cli {

namespace {

struct Options {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> sets;
  std::optional<int> level;
};

void add_common(CLI::App& sub, Options& o, bool config_required) {
  auto* config = sub.add_option("--config", o.config_path, "Run configuration (key = value text, or .json)");
  if (config_required) config->required();
  sub.add_option("--out", o.out, "Output directory");
  sub.add_option("--set", o.sets, "Override a config entry, key=value (repeatable)");
}

void add_run_flags(CLI::App& sub, Options& o) {
  sub.add_option("--seed", o.seed, "Random seed (overrides the seed key)");
  sub.add_option("--threads", o.threads, "Worker threads (default: FRACVAR_THREADS or 1)");
}

Config load_config(const Options& o) {
  Config config = o.config_path.empty() ? Config("<command line>") : Config::load(o.config_path);
  for (const auto& entry : o.sets) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError("--set", 0, entry, "expected key=value");
    config.set(entry.substr(0, eq), entry.substr(eq + 1));
  }
  if (o.level) config.set("measure.level", std::to_string(*o.level));
  return config;
}

Overrides overrides_of(const Options& o, std::optional<ProblemKind> problem) {
  Overrides ov;
  if (!o.out.empty()) ov.out = o.out;
  ov.seed = o.seed;
  ov.threads = o.threads;
  ov.problem = problem;
  return ov;
}

void require_output(const RunConfig& run, const Config& config) {
  if (run.output_dir.empty()) {
    throw ConfigError(config.source(), 0, "output.dir", "missing required field (or pass --out)");
  }
}

void report_solution(std::ostream& out, const RunConfig& run, const SolverResult& r) {
  out << to_string(run.problem) << " on " << run.model->name() << ": " << to_string(r.status) << " after "
      << r.iterations << " iterations, objective = " << std::setprecision(17) << r.objective
      << ", residual = " << r.residual << std::defaultfloat << "\n";
  if (r.lambda) out << "lambda = " << std::setprecision(17) << *r.lambda << std::defaultfloat << "\n";
}

int run_experiment(std::string_view command, const Options& o, std::optional<ProblemKind> problem, std::ostream& out,
                   std::ostream& err) {
  const Config config = load_config(o);
  const RunConfig run = prepare(config, overrides_of(o, problem));
  require_output(run, config);
  const Outcome outcome = execute(run);
  const auto written = write_artifacts(command, run, outcome);

  int code = kExitOk;
  if (outcome.solution) {
    report_solution(out, run, *outcome.solution);
    if (!outcome.solution->converged()) {
      err << "fracvar: " << to_string(run.problem) << " did not converge (" << to_string(outcome.solution->status)
          << " after " << outcome.solution->iterations << " iterations); last residual = " << std::setprecision(17)
          << outcome.solution->residual << std::defaultfloat << "\n";
      code = kExitNonConvergence;
    }
  } else if (run.problem == ProblemKind::verify) {
    out << checks_table(outcome.checks);
    std::size_t failed = 0;
    for (const auto& c : outcome.checks) failed += c.pass ? 0 : 1;
    out << run.model->name() << ": " << outcome.checks.size() - failed << " of " << outcome.checks.size()
        << " checks pass\n";
    if (failed > 0) code = kExitFailure;
  } else if (run.problem == ProblemKind::poincare) {
    out << "poincare constant on " << run.model->name() << ": ";
    if (outcome.poincare) {
      out << std::setprecision(17) << *outcome.poincare << std::defaultfloat << "\n";
    } else {
      out << "none (the energy form is not definite on the region)\n";
    }
  } else if (run.problem == ProblemKind::measure_table) {
    out << "measure table level " << run.measure_level << ": " << outcome.table.size() << " cells\n";
  }
  for (const auto& path : written) out << "wrote " << path.string() << "\n";
  return code;
}

int measure_table_command(const Options& o, std::ostream& out, std::ostream& err) {
  const Config config = load_config(o);
  if (o.out.empty() && !config.has("output.dir")) {
    out << measure_table_csv(measure_table(config.get_int("measure.level")));
    return kExitOk;
  }
  return run_experiment("measure-table", o, ProblemKind::measure_table, out, err);
}

int export_model_command(const Options& o, std::ostream& out) {
  const Config config = load_config(o);
  const EnergyModel model = read_model(config);
  const std::string text = export_model_json(model);
  const std::string dir = o.out.empty() ? config.get_string("output.dir", "") : o.out;
  if (dir.empty()) {
    out << text;
  } else {
    const auto path = std::filesystem::path(dir) / "model.json";
    write_file(path, text);
    out << "wrote " << path.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fracvar: p-energies and variational problems on fractal and degenerate energy models"};
  app.require_subcommand(1);

  Options run_opts;
  auto* run = app.add_subcommand("run", "Solve the problem described by a run configuration");
  add_common(*run, run_opts, true);
  add_run_flags(*run, run_opts);

  Options verify_opts;
  auto* verify = app.add_subcommand("verify", "Run the verification suite on a model");
  add_common(*verify, verify_opts, false);
  add_run_flags(*verify, verify_opts);

  Options table_opts;
  auto* table = app.add_subcommand("measure-table", "Tabulate the Kusuoka cell measures and Z eigenvalues");
  add_common(*table, table_opts, false);
  table->add_option("--level", table_opts.level, "Gasket level");

  Options export_opts;
  auto* exporter = app.add_subcommand("export-model", "Write the model as JSON");
  add_common(*exporter, export_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) return run_experiment("run", run_opts, std::nullopt, out, err);
    if (*verify) return run_experiment("verify", verify_opts, ProblemKind::verify, out, err);
    if (*table) return measure_table_command(table_opts, out, err);
    if (*exporter) return export_model_command(export_opts, out);
  } catch (const InputError& e) {
    err << "fracvar: error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ResourceError& e) {
    err << "fracvar: error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SolverError& e) {
    err << "fracvar: solver error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    err << "fracvar: unexpected error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace fracvar::cli

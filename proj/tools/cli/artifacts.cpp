#include "artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fracvar::cli {

namespace {

using nlohmann::json;

json model_block(const EnergyModel& model) {
  const ModelSpec& spec = model.spec();
  json m;
  m["name"] = model.name();
  m["kind"] = std::string(to_string(spec.kind));
  if (spec.kind == ModelKind::sierpinski || spec.kind == ModelKind::product) {
    m["level"] = spec.level;
    m["probability_measure"] = spec.probability_measure;
  }
  if (spec.kind != ModelKind::sierpinski) m["cells"] = spec.cells;
  m["dofs"] = model.dof_count();
  m["fibers"] = model.fiber_count();
  m["components"] = model.component_count();
  m["total_mass"] = model.total_mass();
  return m;
}

json solver_block(const SolverConfig& s) {
  json j;
  j["p"] = s.p;
  j["tolerance"] = s.effective_tolerance();
  j["max_iterations"] = s.max_iterations;
  j["memory"] = s.memory;
  j["armijo"] = s.armijo;
  j["backtrack"] = s.backtrack;
  j["eps_schedule"] = s.p < 2.0 ? s.effective_schedule() : std::vector<double>{};
  j["constraint_tolerance"] = s.constraint_tolerance;
  j["max_test_functions"] = s.max_test_functions;
  return j;
}

json solution_block(const SolverResult& r) {
  json j;
  j["problem"] = r.problem;
  j["status"] = std::string(to_string(r.status));
  j["converged"] = r.converged();
  j["iterations"] = r.iterations;
  j["objective"] = r.objective;
  j["residual"] = r.residual;
  j["lambda"] = r.lambda ? json(*r.lambda) : json(nullptr);
  j["diagnostics"] = r.diagnostics;
  j["notes"] = r.notes;
  j["values"] = std::vector<double>(r.u.data(), r.u.data() + r.u.size());
  json trace = json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"iteration", t.iteration}, {"stage", t.stage}, {"objective", t.objective}, {"residual", t.residual}});
  }
  j["trace"] = std::move(trace);
  return j;
}

json check_block(const CheckReport& c) {
  json j;
  j["name"] = c.name;
  j["model"] = c.model;
  j["kind"] = c.kind;
  j["samples"] = c.samples;
  j["worst_margin"] = c.worst_margin;
  j["tolerance"] = c.tolerance;
  j["pass"] = c.pass;
  j["seed"] = c.seed;
  j["columns"] = c.columns;
  j["rows"] = c.rows;
  return j;
}

bool all_pass(const std::vector<CheckReport>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

}  // namespace

std::string csv_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string result_json(std::string_view command, const RunConfig& run, const Outcome& outcome) {
  json doc;
  doc["schema"] = kResultSchema;
  doc["command"] = std::string(command);
  doc["problem"] = std::string(to_string(run.problem));
  doc["seed"] = run.seed;
  doc["config"] = run.echo;
  if (run.model) doc["model"] = model_block(*run.model);

  json result;
  switch (run.problem) {
    case ProblemKind::measure_table: {
      double nu_sum = 0.0;
      for (const auto& cell : outcome.table) nu_sum += cell.nu;
      result["level"] = run.measure_level;
      result["rows"] = outcome.table.size();
      result["nu_sum"] = nu_sum;
      break;
    }
    case ProblemKind::verify: {
      result["pass"] = all_pass(outcome.checks);
      json checks = json::array();
      for (const auto& c : outcome.checks) checks.push_back(check_block(c));
      result["checks"] = std::move(checks);
      break;
    }
    case ProblemKind::poincare:
      doc["solver"] = {{"p", run.solver.p}};
      doc["region"] = {{"spec", run.region_spec}, {"size", run.region.size()}};
      result["definite"] = outcome.poincare.has_value();
      result["poincare_constant"] = outcome.poincare ? json(*outcome.poincare) : json(nullptr);
      break;
    default:
      doc["solver"] = solver_block(run.solver);
      doc["region"] = {{"spec", run.region_spec}, {"size", run.region.size()}};
      result = solution_block(*outcome.solution);
      break;
  }
  doc["result"] = std::move(result);
  return doc.dump(2) + "\n";
}

std::string trace_csv(const SolverResult& result) {
  std::string out = "iteration,stage,objective,residual\n";
  for (const auto& t : result.trace) {
    out += std::to_string(t.iteration) + "," + std::to_string(t.stage) + "," + csv_number(t.objective) + "," +
           csv_number(t.residual) + "\n";
  }
  return out;
}

std::string solution_csv(const EnergyModel& model, const DiscreteFunction& u) {
  std::string out = "dof,x,y,z,value\n";
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const Eigen::Vector3d& x = model.coordinates()[static_cast<std::size_t>(i)];
    out += std::to_string(i) + "," + csv_number(x.x()) + "," + csv_number(x.y()) + "," + csv_number(x.z()) + "," +
           csv_number(u[i]) + "\n";
  }
  return out;
}

std::string checks_csv(const std::vector<CheckReport>& checks) {
  std::string out = "name,kind,samples,worst_margin,tolerance,pass\n";
  for (const auto& c : checks) {
    out += c.name + "," + c.kind + "," + std::to_string(c.samples) + "," + csv_number(c.worst_margin) + "," +
           csv_number(c.tolerance) + "," + (c.pass ? "true" : "false") + "\n";
  }
  return out;
}

std::string measure_table_csv(const std::vector<sg::CellEnergyData>& table) {
  std::string out = "word,nu,z_min,z_max\n";
  for (const auto& cell : table) {
    out += cell.word.str() + "," + csv_number(cell.nu) + "," + csv_number(cell.z_eigenvalues[0]) + "," +
           csv_number(cell.z_eigenvalues[1]) + "\n";
  }
  return out;
}

std::string checks_table(const std::vector<CheckReport>& checks) {
  std::ostringstream os;
  os << std::left << std::setw(28) << "check" << std::setw(20) << "kind" << std::right << std::setw(8) << "samples"
     << std::setw(16) << "worst_margin" << "  result\n";
  for (const auto& c : checks) {
    os << std::left << std::setw(28) << c.name << std::setw(20) << c.kind << std::right << std::setw(8) << c.samples
       << std::setw(16) << std::setprecision(6) << std::scientific << c.worst_margin << "  "
       << (c.pass ? "pass" : "FAIL") << "\n";
    os << std::defaultfloat;
  }
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path.string(), 0, "output.dir", "cannot open for writing");
  out << text;
  if (!out.flush()) throw ConfigError(path.string(), 0, "output.dir", "write failed");
}

std::vector<std::filesystem::path> write_artifacts(std::string_view command, const RunConfig& run,
                                                   const Outcome& outcome) {
  const std::filesystem::path& dir = run.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError(dir.string(), 0, "output.dir", "cannot create output directory");
  }
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back(dir / name);
  };
  emit("result.json", result_json(command, run, outcome));
  if (outcome.solution) {
    emit("trace.csv", trace_csv(*outcome.solution));
    emit("solution.csv", solution_csv(*run.model, outcome.solution->u));
  }
  if (run.problem == ProblemKind::verify) emit("checks.csv", checks_csv(outcome.checks));
  if (run.problem == ProblemKind::measure_table) emit("measure_table.csv", measure_table_csv(outcome.table));
  return written;
}

}  // namespace fracvar::cli

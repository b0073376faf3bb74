#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "app.hpp"
#include "artifacts.hpp"
#include "config.hpp"
#include "experiment.hpp"
#include "fracvar/sierpinski.hpp"
#include "oracles.hpp"

using namespace fracvar;
using namespace fracvar::cli;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path dir = fs::temp_directory_path() / "fracvar_cli_tests" / (std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct AppRun {
  int code;
  std::string out;
  std::string err;
};

AppRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fracvar");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_app(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* kGasketConfig =
    "# harmonic extension on the gasket\n"
    "problem.type = dirichlet\n"
    "model.name = sierpinski\n"
    "model.level = 3\n"
    "problem.boundary = corners:1,0,0\n"
    "solver.p = 2\n"
    "seed = 0\n";

template <typename F>
ConfigError config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a ConfigError";
  return ConfigError("", 0, "", "");
}

}  // namespace

// --- Config ----------------------------------------------------------------

TEST(Config, ParsesKeyValueText) {
  const auto c = Config::parse_text("# comment\n\n  model.name = interval  # trailing\nsolver.p=3\n", "a.cfg");
  EXPECT_EQ(c.get_string("model.name"), "interval");
  EXPECT_EQ(c.get_double("solver.p"), 3.0);
  EXPECT_FALSE(c.has("seed"));
  EXPECT_EQ(c.get_int("model.cells", 7), 7);
}

TEST(Config, TextDiagnosticsNameLineAndField) {
  auto e = config_error([] { Config::parse_text("a = 1\nno equals sign\n", "a.cfg"); });
  EXPECT_EQ(e.line(), 2);
  EXPECT_NE(std::string(e.what()).find("a.cfg:2"), std::string::npos);

  e = config_error([] { Config::parse_text("a = 1\na = 2\n", "a.cfg"); });
  EXPECT_EQ(e.line(), 2);
  EXPECT_EQ(e.field(), "a");

  e = config_error([] { Config::parse_text("bad key = 1\n", "a.cfg"); });
  EXPECT_EQ(e.line(), 1);

  e = config_error([] { Config::parse_text("solver.p =\n", "a.cfg"); });
  EXPECT_EQ(e.field(), "solver.p");

  const auto c = Config::parse_text("x = 1\n\nsolver.p = abc\n", "a.cfg");
  e = config_error([&] { c.get_double("solver.p"); });
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.field(), "solver.p");
  EXPECT_NE(std::string(e.what()).find("a.cfg:3: field 'solver.p'"), std::string::npos);
}

TEST(Config, JsonIsFlattenedToDottedKeys) {
  const auto c = Config::parse_json(
      R"({"model": {"name": "sierpinski", "level": 2}, "solver": {"p": 1.5, "eps_schedule": [0.1, 0.01]},
          "model2": {"probability_measure": true}})",
      "a.json");
  EXPECT_EQ(c.get_string("model.name"), "sierpinski");
  EXPECT_EQ(c.get_int("model.level"), 2);
  EXPECT_EQ(c.get_double("solver.p"), 1.5);
  EXPECT_EQ(c.get_doubles("solver.eps_schedule", {}), (std::vector<double>{0.1, 0.01}));
  EXPECT_TRUE(c.get_bool("model2.probability_measure", false));
  EXPECT_THROW(Config::parse_json("{not json", "a.json"), ConfigError);
  EXPECT_THROW(Config::parse_json("[1, 2]", "a.json"), ConfigError);
  EXPECT_THROW(Config::parse_json(R"({"a": null})", "a.json"), ConfigError);
}

TEST(Config, LoadPicksFormatByExtension) {
  const auto dir = scratch_dir();
  write_text(dir / "run.json", R"({"solver": {"p": 4}})");
  write_text(dir / "run.cfg", "solver.p = 4\n");
  EXPECT_EQ(Config::load(dir / "run.json").get_double("solver.p"), 4.0);
  EXPECT_EQ(Config::load(dir / "run.cfg").get_double("solver.p"), 4.0);
  EXPECT_EQ(Config::load(dir / "run.cfg").base_dir(), dir);
  EXPECT_THROW(Config::load(dir / "missing.cfg"), ConfigError);
}

TEST(Config, StrictScalars) {
  EXPECT_EQ(parse_number(" 2.5 "), 2.5);
  EXPECT_EQ(parse_number("+1e-3"), 1e-3);
  EXPECT_FALSE(parse_number("2.5x"));
  EXPECT_FALSE(parse_number(""));
  EXPECT_FALSE(parse_number("inf"));
  EXPECT_FALSE(parse_number("nan"));
  EXPECT_EQ(split_list(" 1, 2 ,3"), (std::vector<std::string>{"1", "2", "3"}));
  EXPECT_TRUE(split_list("  ").empty());

  const auto c = Config::parse_text("n = 2.5\nb = maybe\ns = -1\n", "a.cfg");
  EXPECT_THROW(c.get_int("n"), ConfigError);
  EXPECT_THROW(c.get_bool("b", false), ConfigError);
  EXPECT_THROW(c.get_seed("s", 0), ConfigError);
}

TEST(Config, UnusedFieldsAreRejected) {
  const auto c = Config::parse_text("solver.p = 2\nsolver.tolerence = 1e-9\n", "a.cfg");
  c.get_double("solver.p");
  const auto e = config_error([&] { c.reject_unused(); });
  EXPECT_EQ(e.field(), "solver.tolerence");
  EXPECT_EQ(e.line(), 2);
}

// --- prepare ---------------------------------------------------------------

TEST(Prepare, MissingExponentNamesTheField) {
  auto c = Config::parse_text("problem.type = dirichlet\nmodel.name = interval\n", "a.cfg");
  const auto e = config_error([&] { prepare(c, {}); });
  EXPECT_EQ(e.field(), "solver.p");
}

TEST(Prepare, RejectsBadProblemAndModel) {
  EXPECT_EQ(config_error([] { prepare(Config::parse_text("problem.type = heat\n", "a"), {}); }).field(),
            "problem.type");
  EXPECT_EQ(config_error([] {
              prepare(Config::parse_text("problem.type = dirichlet\nmodel.name = carpet\nsolver.p = 2\n", "a"), {});
            }).field(),
            "model.name");
  EXPECT_EQ(config_error([] {
              prepare(Config::parse_text("problem.type = dirichlet\nmodel.name = sierpinski\nmodel.level = 11\n"
                                         "solver.p = 2\n",
                                         "a"),
                      {});
            }).field(),
            "model.level");
  EXPECT_EQ(config_error([] {
              prepare(Config::parse_text("problem.type = dirichlet\nmodel.name = square\nmodel.cells = 1000\n"
                                         "solver.p = 2\n",
                                         "a"),
                      {});
            }).field(),
            "model.cells");
  EXPECT_EQ(config_error([] {
              prepare(Config::parse_text("problem.type = dirichlet\nmodel.name = interval\nsolver.p = 1\n", "a"), {});
            }).field(),
            "solver.p");
}

TEST(Prepare, DataSpecs) {
  const std::string head = "problem.type = dirichlet\nmodel.name = interval\nmodel.cells = 4\nsolver.p = 2\n";
  auto boundary = [&](const std::string& spec) {
    return prepare(Config::parse_text(head + "problem.boundary = " + spec + "\n", "a"), {}).boundary;
  };
  EXPECT_EQ(boundary("zero"), Eigen::VectorXd::Zero(5));
  EXPECT_EQ(boundary("2.5"), Eigen::VectorXd::Constant(5, 2.5));
  EXPECT_EQ(boundary("constant:-1"), Eigen::VectorXd::Constant(5, -1.0));
  Eigen::VectorXd expected(5);
  expected << 1.0, 1.5, 2.0, 2.5, 3.0;
  EXPECT_TRUE(boundary("linear:1,2").isApprox(expected, 1e-15));
  EXPECT_EQ(boundary("values:1,1.5,2,2.5,3"), expected);
  EXPECT_EQ(boundary("1,1.5,2,2.5,3"), expected);

  EXPECT_EQ(config_error([&] { boundary("values:1,2"); }).field(), "problem.boundary");
  EXPECT_EQ(config_error([&] { boundary("corners:1,0,0"); }).field(), "problem.boundary");
  EXPECT_EQ(config_error([&] { boundary("spline:1"); }).field(), "problem.boundary");
  EXPECT_EQ(config_error([&] { boundary("linear:1,x"); }).field(), "problem.boundary");
  const auto e = config_error([&] { boundary("file:does_not_exist.csv"); });
  EXPECT_EQ(e.field(), "problem.boundary");
  EXPECT_EQ(e.line(), 5);
}

TEST(Prepare, DataFilesAcceptSolutionCsv) {
  const auto dir = scratch_dir();
  const auto m = build_model(ModelSpec{ModelKind::interval, 0, 4, false});
  Eigen::VectorXd u(5);
  u << 0.0, 0.1, 0.2, 0.3, 0.4;
  write_text(dir / "u.csv", solution_csv(m, u));
  write_text(dir / "plain.txt", "0\n0.1\n\n0.2\n0.3\n0.4\n");
  write_text(dir / "short.txt", "0\n0.1\n");
  const std::string head = "problem.type = dirichlet\nmodel.name = interval\nmodel.cells = 4\nsolver.p = 2\n";
  for (const char* name : {"u.csv", "plain.txt"}) {
    write_text(dir / "run.cfg", head + "problem.boundary = file:" + name + "\n");
    EXPECT_EQ(prepare(Config::load(dir / "run.cfg"), {}).boundary, u) << name;
  }
  write_text(dir / "run.cfg", head + "problem.boundary = file:short.txt\n");
  EXPECT_THROW(prepare(Config::load(dir / "run.cfg"), {}), ConfigError);
}

TEST(Prepare, Regions) {
  const std::string head = "problem.type = poincare\nmodel.name = square\nmodel.cells = 8\nsolver.p = 2\n";
  auto region = [&](const std::string& spec) {
    return prepare(Config::parse_text(head + "problem.region = " + spec + "\n", "a"), {}).region;
  };
  const auto m = build_model(ModelSpec{ModelKind::square, 0, 8, false});
  EXPECT_EQ(region("interior").size(), 49u);
  EXPECT_EQ(region("all").mask(), m.interior().mask());
  EXPECT_EQ(region("upper").mask(), m.region("upper").mask());
  EXPECT_EQ(region("line").size(), 7u);
  const Region box = region("box:-0.5,0.5,-0.5,0.5");
  EXPECT_EQ(box.size(), 25u);
  EXPECT_TRUE(box.subset_of(m.interior()));
  EXPECT_EQ(config_error([&] { region("box:1,0"); }).field(), "problem.region");
  EXPECT_EQ(config_error([&] { region("box:0,1,2"); }).field(), "problem.region");
  EXPECT_EQ(config_error([&] { region("middle"); }).field(), "problem.region");
}

TEST(Prepare, ProblemSpecificValidation) {
  // Obstacle problems are quadratic.
  const std::string obstacle =
      "problem.type = obstacle\nmodel.name = interval\nmodel.cells = 8\nproblem.obstacle = -0.1\n";
  EXPECT_NO_THROW(prepare(Config::parse_text(obstacle, "a"), {}));
  EXPECT_EQ(config_error([&] { prepare(Config::parse_text(obstacle + "solver.p = 3\n", "a"), {}); }).field(),
            "solver.p");
  EXPECT_EQ(config_error([&] {
              prepare(Config::parse_text(obstacle + "problem.boundary = -0.2\n", "a"), {});
            }).field(),
            "problem.obstacle");
  EXPECT_EQ(config_error([] {
              prepare(Config::parse_text("problem.type = obstacle\nmodel.name = interval\n", "a"), {});
            }).field(),
            "problem.obstacle");

  // Cubic constraint whose growth constant is too small for p = 2.
  const std::string constrained = "problem.type = constrained\nmodel.name = interval\nsolver.p = 2\n";
  EXPECT_NO_THROW(prepare(Config::parse_text(constrained + "problem.constraint = cubic\n", "a"), {}));
  EXPECT_EQ(config_error([&] {
              prepare(Config::parse_text(constrained + "problem.constraint = cubic\nproblem.growth_constant = 1\n",
                                         "a"),
                      {});
            }).field(),
            "problem.constraint");

  // Keys that do not apply to the problem are reported.
  EXPECT_EQ(config_error([] {
              prepare(Config::parse_text("problem.type = dirichlet\nmodel.name = interval\nsolver.p = 2\n"
                                         "problem.source = 1\n",
                                         "a"),
                      {});
            }).field(),
            "problem.source");

  // Solver settings are range checked.
  EXPECT_THROW(prepare(Config::parse_text(constrained + "solver.max_iterations = 0\n", "a"), {}), ConfigError);
}

TEST(Prepare, OverridesAndEcho) {
  auto c = Config::parse_text(std::string(kGasketConfig) + "output.dir = somewhere\n", "a");
  Overrides o;
  o.seed = 7;
  o.out = "elsewhere";
  const RunConfig run = prepare(c, o);
  EXPECT_EQ(run.seed, 7u);
  EXPECT_EQ(run.solver.seed, 7u);
  EXPECT_EQ(run.output_dir, fs::path("elsewhere"));
  EXPECT_EQ(run.echo.count("output.dir"), 0u);
  EXPECT_EQ(run.echo.at("solver.p"), "2");
}

TEST(Threads, FlagThenEnvironment) {
  ::unsetenv("FRACVAR_THREADS");
  EXPECT_EQ(resolve_threads(std::nullopt), 1);
  EXPECT_EQ(resolve_threads(3), 3);
  ::setenv("FRACVAR_THREADS", "4", 1);
  EXPECT_EQ(resolve_threads(std::nullopt), 4);
  EXPECT_EQ(resolve_threads(2), 2);
  ::setenv("FRACVAR_THREADS", "four", 1);
  EXPECT_THROW(resolve_threads(std::nullopt), ConfigError);
  ::setenv("FRACVAR_THREADS", "0", 1);
  EXPECT_THROW(resolve_threads(std::nullopt), ConfigError);
  ::unsetenv("FRACVAR_THREADS");
  EXPECT_THROW(resolve_threads(0), ConfigError);
}

// --- execution and artifacts -----------------------------------------------

TEST(Execute, GasketCornerDataGivesHarmonicExtension) {
  const RunConfig run = prepare(Config::parse_text(kGasketConfig, "a"), {});
  const Outcome outcome = execute(run);
  ASSERT_TRUE(outcome.solution);
  ASSERT_TRUE(outcome.solution->converged());
  const Eigen::VectorXd h = oracle::graph_harmonic(sg::build_level_graph(3), Eigen::Vector3d(1, 0, 0));
  EXPECT_LE((outcome.solution->u - h).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Execute, EveryProblemKindRuns) {
  const std::vector<std::string> configs = {
      "problem.type = anisotropic\nmodel.name = square\nmodel.cells = 8\nsolver.p = 3\n"
      "problem.boundary = linear:0,1,1\n",
      "problem.type = constrained\nmodel.name = interval\nmodel.cells = 16\nsolver.p = 2\n"
      "problem.boundary = linear:0,1\n",
      "problem.type = obstacle\nmodel.name = interval\nmodel.cells = 32\nproblem.source = -2\n"
      "problem.obstacle = -0.07\n",
      "problem.type = poincare\nmodel.name = interval\nmodel.cells = 32\nsolver.p = 2\n",
  };
  for (const auto& text : configs) {
    SCOPED_TRACE(text);
    const RunConfig run = prepare(Config::parse_text(text, "a"), {});
    const Outcome outcome = execute(run);
    if (run.problem == ProblemKind::poincare) {
      ASSERT_TRUE(outcome.poincare);
      EXPECT_GT(*outcome.poincare, 0.0);
      continue;
    }
    ASSERT_TRUE(outcome.solution);
    EXPECT_TRUE(outcome.solution->converged());
    if (run.problem == ProblemKind::obstacle) {
      EXPECT_GE(outcome.solution->diagnostics.at("inequality_margin"), -1e-8);
    }
    if (run.problem == ProblemKind::constrained) EXPECT_TRUE(outcome.solution->lambda.has_value());
  }
}

TEST(MeasureTable, RowsAndMassTotals) {
  for (int level : {0, 1, 2, 4}) {
    const auto table = measure_table(level);
    ASSERT_EQ(table.size(), static_cast<std::size_t>(std::pow(3, level)));
    double total = 0.0;
    for (const auto& cell : table) total += cell.nu;
    EXPECT_NEAR(total, 2.0, 1e-10);
  }
  EXPECT_NEAR(measure_table(0)[0].nu, 2.0, 1e-12);
  EXPECT_THROW(measure_table(-1), InputError);
  EXPECT_THROW(measure_table(sg::kMaxLevel + 1), InputError);
}

TEST(MeasureTable, ChildrenResumToParents) {
  const auto fine = measure_table(4);
  const auto coarse = measure_table(3);
  std::map<std::string, double> sums;
  for (const auto& cell : fine) sums[cell.word.parent().str()] += cell.nu;
  ASSERT_EQ(sums.size(), coarse.size());
  for (const auto& cell : coarse) EXPECT_NEAR(sums.at(cell.word.str()), cell.nu, 1e-12) << cell.word.str();
}

TEST(Artifacts, CsvNumbersRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    const std::string text = csv_number(x);
    EXPECT_EQ(std::stod(text), x) << text;
  }
  EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
}

TEST(Artifacts, LayoutsAndDeterminism) {
  const auto dir = scratch_dir();
  RunConfig run = prepare(Config::parse_text(kGasketConfig, "a"), {});
  run.output_dir = dir;
  const Outcome outcome = execute(run);
  const auto written = write_artifacts("run", run, outcome);
  ASSERT_EQ(written.size(), 3u);

  const auto solution = read_csv(dir / "solution.csv");
  ASSERT_EQ(solution.size(), 43u);
  EXPECT_EQ(solution[0], (std::vector<std::string>{"dof", "x", "y", "z", "value"}));
  for (std::size_t i = 1; i < solution.size(); ++i) {
    ASSERT_EQ(solution[i].size(), 5u);
    EXPECT_EQ(std::stoi(solution[i][0]), static_cast<int>(i - 1));
    EXPECT_EQ(std::stod(solution[i][4]), outcome.solution->u[static_cast<Eigen::Index>(i - 1)]);
  }

  const auto trace = read_csv(dir / "trace.csv");
  EXPECT_EQ(trace[0], (std::vector<std::string>{"iteration", "stage", "objective", "residual"}));
  EXPECT_EQ(trace.size(), outcome.solution->trace.size() + 1);

  const auto doc = nlohmann::json::parse(read_text(dir / "result.json"));
  EXPECT_EQ(doc.at("schema"), kResultSchema);
  EXPECT_EQ(doc.at("problem"), "dirichlet");
  EXPECT_EQ(doc.at("result").at("values").size(), 42u);
  EXPECT_EQ(doc.at("result").at("values")[7].get<double>(), outcome.solution->u[7]);
  EXPECT_TRUE(doc.at("result").at("converged").get<bool>());
  EXPECT_FALSE(doc.contains("timestamp"));

  EXPECT_EQ(result_json("run", run, outcome), result_json("run", run, execute(run)));
}

TEST(Artifacts, MeasureTableCsv) {
  const auto table = measure_table(2);
  std::istringstream in(measure_table_csv(table));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "word,nu,z_min,z_max");
  int rows = 0;
  double total = 0.0;
  while (std::getline(in, line)) {
    ++rows;
    total += std::stod(line.substr(line.find(',') + 1));
  }
  EXPECT_EQ(rows, 9);
  EXPECT_NEAR(total, 2.0, 1e-10);
}

// --- command line ------------------------------------------------------------

TEST(App, RunWritesArtifactsAndIsReproducible) {
  const auto dir = scratch_dir();
  write_text(dir / "run.cfg", kGasketConfig);
  const auto a = run_cli({"run", "--config", (dir / "run.cfg").string(), "--out", (dir / "a").string()});
  const auto b = run_cli({"run", "--config", (dir / "run.cfg").string(), "--out", (dir / "b").string(), "--threads", "2"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ASSERT_EQ(b.code, kExitOk) << b.err;
  for (const char* name : {"result.json", "trace.csv", "solution.csv"}) {
    EXPECT_EQ(read_text(dir / "a" / name), read_text(dir / "b" / name)) << name;
  }
}

TEST(App, ValidationErrorsExitTwo) {
  const auto dir = scratch_dir();
  write_text(dir / "run.cfg", "problem.type = dirichlet\nmodel.name = interval\n");
  auto r = run_cli({"run", "--config", (dir / "run.cfg").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("solver.p"), std::string::npos) << r.err;

  write_text(dir / "run.cfg", "problem.type = dirichlet\nmodel.name = interval\nsolver.p = 2\n");
  r = run_cli({"run", "--config", (dir / "run.cfg").string()});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("output.dir"), std::string::npos) << r.err;

  EXPECT_EQ(run_cli({"run"}).code, kExitValidation);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitValidation);
  EXPECT_EQ(run_cli({"run", "--config", (dir / "run.cfg").string(), "--set", "novalue"}).code, kExitValidation);
  EXPECT_EQ(run_cli({"measure-table", "--level", "13"}).code, kExitValidation);
  EXPECT_EQ(run_cli({"measure-table", "--level", "-1"}).code, kExitValidation);
  EXPECT_EQ(run_cli({"export-model", "--set", "model.name=torus"}).code, kExitValidation);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
}

TEST(App, NonConvergenceExitsThreeWithLastResidual) {
  const auto dir = scratch_dir();
  write_text(dir / "run.cfg", std::string(kGasketConfig) + "solver.max_iterations = 2\n");
  const auto r = run_cli({"run", "--config", (dir / "run.cfg").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitNonConvergence);
  EXPECT_NE(r.err.find("last residual"), std::string::npos) << r.err;
  const auto doc = nlohmann::json::parse(read_text(dir / "result.json"));
  EXPECT_EQ(doc.at("result").at("status"), "max_iterations");
}

TEST(App, VerifyGasket) {
  const auto dir = scratch_dir();
  const auto r = run_cli({"verify", "--set", "model.name=sierpinski", "--set", "model.level=3", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
  const auto doc = nlohmann::json::parse(read_text(dir / "result.json"));
  EXPECT_TRUE(doc.at("result").at("pass").get<bool>());
  EXPECT_GE(doc.at("result").at("checks").size(), 10u);
  EXPECT_EQ(read_csv(dir / "checks.csv").size(), doc.at("result").at("checks").size() + 1);
}

TEST(App, MeasureTableAndExport) {
  const auto dir = scratch_dir();
  auto r = run_cli({"measure-table", "--level", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);

  r = run_cli({"measure-table", "--level", "3", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_csv(dir / "measure_table.csv").size(), 28u);

  r = run_cli({"export-model", "--set", "model.name=interval", "--set", "model.cells=4", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto model = nlohmann::json::parse(read_text(dir / "model.json"));
  EXPECT_EQ(model.at("schema"), "fracvar.model/1");
}

TEST(App, JsonConfigMatchesTextConfig) {
  const auto dir = scratch_dir();
  write_text(dir / "run.cfg", kGasketConfig);
  write_text(dir / "run.json", R"({"problem": {"type": "dirichlet", "boundary": "corners:1,0,0"},
    "model": {"name": "sierpinski", "level": 3}, "solver": {"p": 2}, "seed": 0})");
  ASSERT_EQ(run_cli({"run", "--config", (dir / "run.cfg").string(), "--out", (dir / "t").string()}).code, 0);
  ASSERT_EQ(run_cli({"run", "--config", (dir / "run.json").string(), "--out", (dir / "j").string()}).code, 0);
  EXPECT_EQ(read_text(dir / "t" / "solution.csv"), read_text(dir / "j" / "solution.csv"));
}

TEST(Executable, ExitCodesFromTheShell) {
  const auto dir = scratch_dir();
  write_text(dir / "run.cfg", "problem.type = dirichlet\nmodel.name = interval\n");
  const std::string exe = FRACVAR_EXECUTABLE;
  auto status = [&](const std::string& args) {
    const int raw = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("run --config " + (dir / "run.cfg").string() + " --out " + dir.string()), 2);
  EXPECT_EQ(status("measure-table --level 2"), 0);
  EXPECT_EQ(status("measure-table --level 99"), 2);
  EXPECT_EQ(status("verify --set model.name=interval --set model.cells=8 --out " + dir.string()), 0);
  ::setenv("FRACVAR_THREADS", "x", 1);
  EXPECT_EQ(status("verify --set model.name=interval --set model.cells=8 --out " + dir.string()), 2);
  ::unsetenv("FRACVAR_THREADS");
}

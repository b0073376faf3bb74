#pragma once

// Artifact files of a run. Layouts are documented in docs/schemas.md.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "experiment.hpp"

namespace fracvar::cli {

inline constexpr const char* kResultSchema = "fracvar.result/1";

/// 17 significant digits, '.' decimal separator.
std::string csv_number(double value);

/// result.json text. Contains no timestamp, so identical inputs give
/// identical bytes.
std::string result_json(std::string_view command, const RunConfig& run, const Outcome& outcome);

/// iteration,stage,objective,residual
std::string trace_csv(const SolverResult& result);
/// dof,x,y,z,value
std::string solution_csv(const EnergyModel& model, const DiscreteFunction& u);
/// name,kind,samples,worst_margin,tolerance,pass
std::string checks_csv(const std::vector<CheckReport>& checks);
/// word,nu,z_min,z_max; the root word is written as an empty field.
std::string measure_table_csv(const std::vector<sg::CellEnergyData>& table);

/// Fixed-width summary of a verification suite for the terminal.
std::string checks_table(const std::vector<CheckReport>& checks);

/// Writes every artifact that applies to the outcome into run.output_dir
/// (created if missing) and returns the written paths. Throws ConfigError if
/// the directory is not writable.
std::vector<std::filesystem::path> write_artifacts(std::string_view command, const RunConfig& run,
                                                   const Outcome& outcome);

/// Writes text to path, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fracvar::cli

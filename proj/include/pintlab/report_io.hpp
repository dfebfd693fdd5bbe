#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pintlab/engine.hpp"

namespace pintlab {

nlohmann::json report_to_json(const RunReport& report);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

struct SpeedupRow {
  std::string algorithm;
  int n_intervals = 0;
  double s_star = 0.0;
  double s_theoretical = 0.0;
  std::optional<double> s_empirical;
};

SpeedupRow speedup_row(const std::string& algorithm, const RunReport& report);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Columns k, L_k, T_G, T_F, T_model, cumulative.
void write_convergence_csv(const std::filesystem::path& path, const RunReport& report);

/// Columns t, u_0 .. u_{d-1}; one row per interval boundary.
void write_solution_csv(const std::filesystem::path& path, const RunReport& report);

/// Columns N, S_star, S_theoretical, S_empirical, with an optional leading
/// algorithm column.
void write_speedup_csv(const std::filesystem::path& path, const std::vector<SpeedupRow>& rows,
                       bool with_algorithm);

/// Writes report.json, convergence.csv, solution.csv and speedup.csv into `dir`.
void write_run_outputs(const std::filesystem::path& dir, const RunReport& report,
                       const std::string& algorithm);

/// Plain numeric CSV reader: header names and rows of doubles (empty cells are NaN).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace pintlab

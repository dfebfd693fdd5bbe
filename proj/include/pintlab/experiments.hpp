#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pintlab/config.hpp"
#include "pintlab/engine.hpp"

namespace pintlab {

struct RunTask {
  std::string group;
  std::string label;
  PintConfig config;
  std::filesystem::path dir;
  bool dataset_csv = false;
};

struct RunOutcome {
  RunTask task;
  RunReport report;
  /// Set when the run threw before producing a report.
  std::string error;

  bool converged() const { return error.empty() && report.converged(); }
};

/// Directory-safe label such as "nngparareal_m15_nearest".
std::string corrector_label(const CorrectorSpec& c);

/// Every (group, corrector, seed) combination.
std::vector<RunTask> plan_runs(const ExperimentConfig& cfg);

/// nnGParareal over each group's sweep.m list and seeds.
std::vector<RunTask> plan_sweep_m(const ExperimentConfig& cfg);

/// Each group's correctors over its coarse step list and seeds.
std::vector<RunTask> plan_sweep_coarse(const ExperimentConfig& cfg);

/// Runs tasks concurrently. Up to `jobs` runs execute at once and each run's fine sweep
/// gets jobs / concurrent workers, so the total never exceeds `jobs`. Results are in
/// task order. Writes per-run outputs when `write_outputs` is set.
std::vector<RunOutcome> execute(const std::vector<RunTask>& tasks, unsigned jobs,
                                bool write_outputs,
                                const std::function<void(const RunOutcome&)>& on_done = {});

struct CliOptions {
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

/// Effective job count: PINT_LAB_THREADS if set, else the requested value.
unsigned resolve_jobs(std::optional<unsigned> requested);

/// CLI commands. Exit codes: 0 all runs converged, 2 some run did not converge
/// (budget or divergence), 1 configuration or I/O error.
int cmd_run(const std::string& config_path, const CliOptions& opts, std::ostream& out,
            std::ostream& err);
int cmd_sweep_m(const std::string& config_path, const CliOptions& opts, std::ostream& out,
                std::ostream& err);
int cmd_sweep_coarse(const std::string& config_path, const CliOptions& opts, std::ostream& out,
                     std::ostream& err);
int cmd_report(const std::string& config_path, const CliOptions& opts, std::ostream& out,
               std::ostream& err);

}  // namespace pintlab

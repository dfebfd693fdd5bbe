#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pintlab/correction_store.hpp"
#include "pintlab/gp.hpp"
#include "pintlab/integrators.hpp"
#include "pintlab/perf_model.hpp"
#include "pintlab/systems.hpp"

namespace pintlab {

enum class CorrectorKind { parareal, mnn_uniform, gparareal, nngparareal };

CorrectorKind parse_corrector_kind(const std::string& tag);
std::string to_string(CorrectorKind kind);

struct CorrectorSpec {
  CorrectorKind kind = CorrectorKind::parareal;
  std::size_t m = 15;
  SubsetStrategy strategy = SubsetStrategy::nearest;

  std::string describe() const;
};

enum class NormalizationMode {
  /// Bounds from the coarse initialization in original coordinates, widened by a margin.
  from_coarse,
  /// Bounds supplied in the config.
  explicit_bounds,
  /// Work in original coordinates.
  none
};

/// Which boundary values take part in the stopping test. `interior` tests the start
/// values U_1..U_{N-1}; `with_endpoint` additionally tests the value at t_N.
enum class FrontierRule { interior, with_endpoint };

struct PintConfig {
  SystemDefinition system;
  int n_intervals = 32;
  SolverSpec coarse{1, 1};
  SolverSpec fine{4, 1};
  double epsilon = 5e-7;
  CorrectorSpec corrector;
  FitOptions fit;
  std::uint64_t seed = 0;
  std::optional<double> budget_seconds;
  NormalizationMode normalization = NormalizationMode::from_coarse;
  double normalization_margin = 0.1;
  std::vector<CoordinateBounds> bounds;
  FrontierRule frontier = FrontierRule::interior;
  unsigned workers = 1;
  bool measure_serial = false;
  bool gp_diagnostics = false;

  void validate() const;
};

enum class RunStatus { converged, budget_exhausted, diverged };
std::string to_string(RunStatus status);

struct IterationRecord {
  int k = 0;
  int frontier = 0;
  std::size_t records_added = 0;
  std::size_t dataset_size = 0;
  double t_coarse = 0.0;
  double t_fine = 0.0;
  double t_model = 0.0;
  double t_cumulative = 0.0;
  double max_change = 0.0;
  int fallbacks = 0;
};

struct GpDiagnosticEntry {
  int k = 0;
  int interval = 0;
  int coordinate = 0;
  std::size_t n = 0;
  GpHyperparams hp;
  double log_likelihood = 0.0;
  int evaluations = 0;
};

struct RunReport {
  RunStatus status = RunStatus::converged;
  std::string message;
  int iterations = 0;
  int n_intervals = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> per_iteration;
  /// Mean wallclock per coarse / fine propagation of one interval.
  double t_g = 0.0;
  double t_f = 0.0;
  double t_init = 0.0;
  double t_model = 0.0;
  double t_alg = 0.0;
  std::optional<double> t_serial_measured;
  SpeedupEstimate speedup;
  std::vector<double> times;
  std::vector<State> trajectory;
  std::vector<CoordinateBounds> normalization_bounds;
  std::size_t dataset_size = 0;
  int fallbacks = 0;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<GpDiagnosticEntry> gp_diagnostics;

  bool converged() const { return status == RunStatus::converged; }
};

/// Boundary values of the current and previous iteration plus the dataset.
struct IterationState {
  int k = 0;
  /// Start values U_0..U_{N-1} have converged up to index `frontier`.
  int frontier = 0;
  /// history[j][i]: value at boundary i (0..N) after iteration j, normalized coordinates.
  std::vector<std::vector<State>> history;
  /// Fine values F(U^{k-1}_{i-1}) indexed by interval i = 1..N (entry 0 unused).
  std::vector<State> fine;
  /// Coarse values G(U^{k-1}_{i-1}) matching `fine`.
  std::vector<State> coarse;
  std::vector<bool> coarse_valid;
  /// Record index of the newest correction for interval i.
  std::vector<std::size_t> last_record;
  std::unique_ptr<CorrectionStore> store;

  const std::vector<State>& current() const { return history.back(); }
};

/// Parareal-family driver. Call run() for a full solve, or coarse_init() followed by
/// repeated step() for manual control.
class PintEngine {
 public:
  explicit PintEngine(PintConfig config);

  /// Sequential coarse pass; also fixes the normalization.
  void coarse_init();

  /// Fine propagation of every unconverged interval from the previous iteration's
  /// values; new corrections are inserted once all propagations finished.
  void fine_sweep();

  /// Sequential predictor-corrector pass over unconverged start values.
  void update_sweep();

  /// Advances and returns the converged frontier.
  int check_convergence();

  /// One full iteration. Returns true once all start values have converged.
  bool step();

  RunReport run();

  /// Per-interval prediction error |(F - G)(U) - f(U)|_inf of `corrector` at the start
  /// values of the current iteration, for intervals updated in the last sweep. Runs
  /// extra fine solves; diagnostic only. Entry j belongs to interval first + j.
  std::vector<double> prediction_error_profile(const CorrectorSpec& corrector,
                                               int* first_interval = nullptr);

  const IterationState& state() const { return state_; }
  const PintConfig& config() const { return config_; }
  const SystemDefinition& working_system() const { return working_; }
  const NormalizationMap& normalization() const { return map_; }
  double time_at(int i) const;
  bool done() const { return done_; }

  /// Serial fine composition from u0 in working coordinates, boundary values 0..N.
  std::vector<State> serial_fine() const;

 private:
  State coarse(int interval, std::span<const double> u) const;
  State fine(int interval, std::span<const double> u) const;
  State correction(const CorrectorSpec& c, int interval, std::span<const double> query,
                   int ordinal, bool* fell_back, std::vector<GpDiagnosticEntry>* diag);
  void fit_full_gp();
  State fallback(int interval) const;

  PintConfig config_;
  SystemDefinition working_;
  NormalizationMap map_;
  IterationState state_;
  std::vector<ScalarGp> full_gp_;
  std::vector<FitResult> full_gp_fits_;
  bool initialized_ = false;
  bool done_ = false;
  RunReport report_;
  std::vector<double> fine_times_;
  std::vector<double> coarse_times_;
  IterationRecord pending_;
  std::chrono::steady_clock::time_point start_;
};

struct TrainingSet {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd outputs;
};

/// Rows follow store order regardless of the order of `indices`, so a subset holding
/// every record reproduces the full-data matrices bit for bit.
TrainingSet gather_training_set(const CorrectionStore& store, std::vector<std::size_t> indices);

/// Convenience: builds an engine and runs it to completion.
RunReport run_pint(const PintConfig& config);

}  // namespace pintlab

#pragma once

#include <optional>
#include <vector>

namespace pintlab {

/// Per-interval solver costs and total model cost of one run, in seconds.
struct TimingBreakdown {
  double t_g = 0.0;
  double t_f = 0.0;
  double t_model = 0.0;
  double t_alg = 0.0;
  double t_serial = 0.0;
};

struct SpeedupEstimate {
  double s_alg = 0.0;
  double s_star = 0.0;
  std::optional<double> s_empirical;
  /// True when the empirical value used N * mean(T_F) instead of a measured serial run.
  bool serial_estimated = false;
};

/// Worst-case runtime K T_F + (K + 1)(N - K/2) T_G + T_model.
double theoretical_runtime(int n, int k, double t_g, double t_f, double t_model);

/// Per-iteration sum N T_G + sum_{k=1..K} (T_F + (N - k) T_G + T_model(k)).
double runtime_by_summation(int n, int k, double t_g, double t_f,
                            const std::vector<double>& t_model_per_iteration);

/// S_alg = (K/N + (K+1)(1 - K/(2N)) T_G/T_F + T_model/(N T_F))^{-1}, S* = N/K.
SpeedupEstimate speedup(int n, int k, double t_g, double t_f, double t_model);

/// T_serial / T_alg. Pass a measured serial time when available, otherwise
/// N * mean(T_F) is used and the estimate is flagged.
double empirical_speedup(int n, double t_alg, double mean_t_f,
                         std::optional<double> measured_serial, bool* estimated = nullptr);

}  // namespace pintlab

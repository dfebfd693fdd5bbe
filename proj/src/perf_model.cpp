#include "pintlab/perf_model.hpp"

#include <stdexcept>

namespace pintlab {

namespace {
void check(int n, int k) {
  if (n < 1) throw std::invalid_argument("perf model: N must be positive");
  if (k < 1 || k > n) throw std::invalid_argument("perf model: need 1 <= K <= N");
}
}  // namespace

double theoretical_runtime(int n, int k, double t_g, double t_f, double t_model) {
  check(n, k);
  const double kk = k;
  return kk * t_f + (kk + 1.0) * (n - kk / 2.0) * t_g + t_model;
}

double runtime_by_summation(int n, int k, double t_g, double t_f,
                            const std::vector<double>& t_model_per_iteration) {
  check(n, k);
  if (t_model_per_iteration.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("perf model: need one T_model value per iteration");
  }
  double total = n * t_g;
  for (int it = 1; it <= k; ++it) {
    total += t_f + (n - it) * t_g + t_model_per_iteration[static_cast<std::size_t>(it - 1)];
  }
  return total;
}

SpeedupEstimate speedup(int n, int k, double t_g, double t_f, double t_model) {
  check(n, k);
  if (!(t_f > 0.0)) throw std::invalid_argument("perf model: T_F must be positive");
  const double kk = k;
  const double nn = n;
  SpeedupEstimate s;
  s.s_alg = 1.0 / (kk / nn + (kk + 1.0) * (1.0 - kk / (2.0 * nn)) * t_g / t_f +
                   t_model / (nn * t_f));
  s.s_star = nn / kk;
  return s;
}

double empirical_speedup(int n, double t_alg, double mean_t_f,
                         std::optional<double> measured_serial, bool* estimated) {
  if (!(t_alg > 0.0)) throw std::invalid_argument("empirical speed-up needs T_alg > 0");
  const bool est = !measured_serial.has_value();
  if (estimated) *estimated = est;
  const double serial = est ? n * mean_t_f : *measured_serial;
  return serial / t_alg;
}

}  // namespace pintlab

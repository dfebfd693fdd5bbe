#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pintlab {

/// Solution value at a time point; dimension is fixed for a given run.
using State = std::vector<double>;

/// Right-hand side h(t, u) of du/dt = h(t, u). Writes the derivative into `dudt`,
/// which has the same length as `u`.
using RhsFunction =
    std::function<void(double t, std::span<const double> u, std::span<double> dudt)>;

/// Raised when an integrator produces a non-finite state.
class SolverDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Explicit Runge-Kutta method used for a propagator. Orders 1, 2, 4 and 8 are
/// forward Euler, explicit midpoint, classical RK4 and Dormand-Prince 8 (fixed step).
struct SolverSpec {
  int order = 4;
  long steps_per_interval = 1;

  void validate() const;
  std::string describe() const;
};

bool is_supported_order(int order);

/// Butcher tableau of an explicit method; `a` is stored row-major and strictly lower
/// triangular.
struct ButcherTableau {
  int order = 0;
  std::vector<double> c;
  std::vector<double> b;
  std::vector<std::vector<double>> a;

  std::size_t stages() const { return c.size(); }
};

const ButcherTableau& tableau_for_order(int order);

/// Reusable stepper with preallocated stage storage. Not thread-safe; use one per
/// worker.
class RkStepper {
 public:
  RkStepper(int order, std::size_t dim);

  /// Advances `u` in place by one step of size `dt` starting at time `t`.
  void step(const RhsFunction& rhs, std::span<double> u, double t, double dt);

  int order() const { return tableau_->order; }

 private:
  const ButcherTableau* tableau_;
  std::size_t dim_;
  std::vector<std::vector<double>> stages_;
  std::vector<double> trial_;
};

/// One explicit RK step of the given order. Throws SolverDivergence on non-finite output.
State rk_step(int order, const RhsFunction& rhs, std::span<const double> u, double t,
              double dt);

/// Applies `spec.steps_per_interval` uniform steps over [t_start, t_end].
State integrate_interval(const SolverSpec& spec, const RhsFunction& rhs,
                         std::span<const double> u0, double t_start, double t_end);

bool all_finite(std::span<const double> u);

}  // namespace pintlab

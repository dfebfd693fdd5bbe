#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pintlab/integrators.hpp"

namespace pintlab {

using ParameterMap = std::map<std::string, double>;

/// Closed interval [lo, hi] for one coordinate.
struct CoordinateBounds {
  double lo = -1.0;
  double hi = 1.0;
};

/// An initial value problem du/dt = rhs(t, u) on [t0, t_end] with u(t0) = initial_condition.
struct SystemDefinition {
  std::string name;
  std::size_t dim = 0;
  RhsFunction rhs;
  State initial_condition;
  double t0 = 0.0;
  double t_end = 1.0;
  ParameterMap parameters;
  std::optional<std::vector<CoordinateBounds>> normalization_bounds;

  /// Checks dimension, time span and that rhs is finite at the initial condition.
  void validate() const;
};

/// Per-coordinate affine change of variables u -> 2 (u - lo) / (hi - lo) - 1.
class NormalizationMap {
 public:
  NormalizationMap() = default;
  explicit NormalizationMap(std::vector<CoordinateBounds> bounds);

  /// Bounds from the per-coordinate min/max of `samples`, widened on each side by
  /// `margin` times the range. Zero-range coordinates get a width of 2 * margin *
  /// max(|value|, 1).
  static NormalizationMap from_samples(const std::vector<State>& samples, double margin);

  static NormalizationMap identity(std::size_t dim);

  State normalize(std::span<const double> u) const;
  State denormalize(std::span<const double> v) const;

  std::size_t dim() const { return bounds_.size(); }
  const std::vector<CoordinateBounds>& bounds() const { return bounds_; }

  /// d(normalized)/d(original) for coordinate j.
  double scale(std::size_t j) const { return scale_[j]; }

 private:
  std::vector<CoordinateBounds> bounds_;
  std::vector<double> scale_;
};

/// Names accepted by make_ode_system.
const std::vector<std::string>& ode_system_names();

/// Benchmark ODE systems with their reference parameters, initial condition and span.
/// Unspecified parameters take the reference values; unknown parameter keys are
/// rejected.
SystemDefinition make_ode_system(const std::string& name, const ParameterMap& params = {});

/// 1-D heat equation u_t = alpha u_xx on (0, L), homogeneous Dirichlet boundaries.
/// The grid has d + 1 points with spacing L / d; the d - 1 interior nodes are the
/// unknowns.
SystemDefinition discretize_heat(std::size_t d, double length, double alpha,
                                 const std::function<double(double)>& u0_profile);

/// Viscous Burgers' equation v_t = nu v_xx - v v_x on [-L, L] with v(-L) = v(L). The
/// d + 1 grid points have spacing 2L / d; the periodic wrap leaves d unknowns at
/// x_0 .. x_{d-1}. Both derivatives use second-order central differences.
SystemDefinition discretize_burgers(std::size_t d, double half_length, double nu,
                                    const std::function<double(double)>& v0_profile);

/// Parameters of the two-dimensional FitzHugh-Nagumo reaction-diffusion model. There
/// are no reference values, so every field must be provided.
struct Fhn2dParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double tau = 0.0;
};

/// 2-D FitzHugh-Nagumo PDE on (-L, L)^2 with periodic boundaries, d_tilde x d_tilde
/// grid per field, 5-point Laplacian. State layout is [v (row-major), w (row-major)],
/// so the dimension is 2 d_tilde^2. The initial condition is drawn uniformly from
/// [0, 1] with the given seed.
SystemDefinition discretize_fhn2d(std::size_t d_tilde, double half_length,
                                  const Fhn2dParams& params, std::uint64_t seed);

/// Same system expressed in normalized coordinates; the rhs picks up the chain-rule
/// factor 2 / (hi - lo) per coordinate.
SystemDefinition normalize_system(const SystemDefinition& system, const NormalizationMap& map);

/// Builds any named system (ODE or PDE) from a flat parameter map. PDE sizes are read
/// from keys such as "d" or "d_tilde".
SystemDefinition make_system(const std::string& name, const ParameterMap& params,
                             std::uint64_t seed);

}  // namespace pintlab

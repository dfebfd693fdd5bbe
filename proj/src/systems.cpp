#include "pintlab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pintlab/rng.hpp"

namespace pintlab {

namespace {

using std::numbers::pi;

double param_or(const ParameterMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::string& system, const ParameterMap& params,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) {
      throw std::invalid_argument("system '" + system + "' has no parameter '" + key + "'");
    }
  }
}

void require_positive(const std::string& system, const std::string& key, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << "system '" << system << "': parameter " << key << " must be positive (got " << value
       << ")";
    throw std::invalid_argument(os.str());
  }
}

SystemDefinition fhn(const ParameterMap& p) {
  reject_unknown("fhn", p, {"a", "b", "c"});
  const double a = param_or(p, "a", 0.2);
  const double b = param_or(p, "b", 0.2);
  const double c = param_or(p, "c", 3.0);
  require_positive("fhn", "c", c);
  SystemDefinition s;
  s.name = "fhn";
  s.dim = 2;
  s.rhs = [a, b, c](double, std::span<const double> u, std::span<double> du) {
    du[0] = c * (u[0] - u[0] * u[0] * u[0] / 3.0 + u[1]);
    du[1] = -(u[0] - a + b * u[1]) / c;
  };
  s.initial_condition = {-1.0, 1.0};
  s.t0 = 0.0;
  s.t_end = 40.0;
  s.parameters = {{"a", a}, {"b", b}, {"c", c}};
  return s;
}

SystemDefinition rossler(const ParameterMap& p) {
  reject_unknown("rossler", p, {"a", "b", "c"});
  const double a = param_or(p, "a", 0.2);
  const double b = param_or(p, "b", 0.2);
  const double c = param_or(p, "c", 5.7);
  require_positive("rossler", "c", c);
  SystemDefinition s;
  s.name = "rossler";
  s.dim = 3;
  s.rhs = [a, b, c](double, std::span<const double> u, std::span<double> du) {
    du[0] = -u[1] - u[2];
    du[1] = u[0] + a * u[1];
    du[2] = b + u[2] * (u[0] - c);
  };
  s.initial_condition = {0.0, -6.78, 0.02};
  s.t0 = 0.0;
  s.t_end = 340.0;
  s.parameters = {{"a", a}, {"b", b}, {"c", c}};
  return s;
}

SystemDefinition brusselator(const ParameterMap& p) {
  reject_unknown("brusselator", p, {"a", "b"});
  const double a = param_or(p, "a", 1.0);
  const double b = param_or(p, "b", 3.0);
  require_positive("brusselator", "a", a);
  require_positive("brusselator", "b", b);
  SystemDefinition s;
  s.name = "brusselator";
  s.dim = 2;
  s.rhs = [a, b](double, std::span<const double> u, std::span<double> du) {
    const double x2y = u[0] * u[0] * u[1];
    du[0] = a + x2y - (b + 1.0) * u[0];
    du[1] = b * u[0] - x2y;
  };
  s.initial_condition = {1.0, 3.7};
  s.t0 = 0.0;
  s.t_end = 100.0;
  s.parameters = {{"a", a}, {"b", b}};
  return s;
}

SystemDefinition double_pendulum(const ParameterMap& p) {
  reject_unknown("double_pendulum", p, {});
  SystemDefinition s;
  s.name = "double_pendulum";
  s.dim = 4;
  s.rhs = [](double, std::span<const double> u, std::span<double> du) {
    const double diff = u[0] - u[1];
    const double sd = std::sin(diff);
    const double cd = std::cos(diff);
    const double f1 = sd * cd;
    const double f2 = 2.0 - cd * cd;
    du[0] = u[2];
    du[1] = u[3];
    du[2] = (-u[2] * u[2] * f1 - u[3] * u[3] * sd - 2.0 * std::sin(u[0]) + cd * std::sin(u[1])) /
            f2;
    du[3] = (2.0 * u[2] * u[2] * sd + u[3] * u[3] * f1 + 2.0 * cd * std::sin(u[0]) -
             2.0 * std::sin(u[1])) /
            f2;
  };
  s.initial_condition = {-0.5, 0.0, 0.0, 0.0};
  s.t0 = 0.0;
  s.t_end = 80.0;
  return s;
}

SystemDefinition lorenz(const ParameterMap& p) {
  reject_unknown("lorenz", p, {"gamma1", "gamma2", "gamma3"});
  const double g1 = param_or(p, "gamma1", 10.0);
  const double g2 = param_or(p, "gamma2", 28.0);
  const double g3 = param_or(p, "gamma3", 8.0 / 3.0);
  require_positive("lorenz", "gamma1", g1);
  require_positive("lorenz", "gamma2", g2);
  require_positive("lorenz", "gamma3", g3);
  SystemDefinition s;
  s.name = "lorenz";
  s.dim = 3;
  s.rhs = [g1, g2, g3](double, std::span<const double> u, std::span<double> du) {
    du[0] = g1 * (u[1] - u[0]);
    du[1] = g2 * u[0] - u[0] * u[2] - u[1];
    du[2] = u[0] * u[1] - g3 * u[2];
  };
  s.initial_condition = {-15.0, -15.0, 20.0};
  s.t0 = 0.0;
  s.t_end = 18.0;
  s.parameters = {{"gamma1", g1}, {"gamma2", g2}, {"gamma3", g3}};
  return s;
}

// Non-autonomous Hopf normal form made autonomous: the third coordinate is a clock
// with unit speed that replaces t in the bifurcation parameter u3 / T.
SystemDefinition hopf(const ParameterMap& p) {
  reject_unknown("hopf", p, {"T"});
  const double period = param_or(p, "T", 500.0);
  require_positive("hopf", "T", period);
  SystemDefinition s;
  s.name = "hopf";
  s.dim = 3;
  s.rhs = [period](double, std::span<const double> u, std::span<double> du) {
    const double mu = u[2] / period - u[0] * u[0] - u[1] * u[1];
    du[0] = -u[1] + u[0] * mu;
    du[1] = u[0] + u[1] * mu;
    du[2] = 1.0;
  };
  s.initial_condition = {0.1, 0.1, 500.0};
  s.t0 = -20.0;
  s.t_end = 500.0;
  s.parameters = {{"T", period}};
  return s;
}

SystemDefinition thomas(const ParameterMap& p) {
  reject_unknown("thomas", p, {"a", "b"});
  const double a = param_or(p, "a", 0.5);
  const double b = param_or(p, "b", 10.0);
  require_positive("thomas", "a", a);
  require_positive("thomas", "b", b);
  SystemDefinition s;
  s.name = "thomas";
  s.dim = 3;
  s.rhs = [a, b](double, std::span<const double> u, std::span<double> du) {
    du[0] = b * std::sin(u[1]) - a * u[0];
    du[1] = b * std::sin(u[2]) - a * u[1];
    du[2] = b * std::sin(u[0]) - a * u[2];
  };
  s.initial_condition = {4.6722764, 5.2437205e-10, -6.4444208e-10};
  s.t0 = 0.0;
  s.t_end = 10.0;
  s.parameters = {{"a", a}, {"b", b}};
  return s;
}

std::size_t size_param(const ParameterMap& p, const std::string& key, double fallback) {
  const double v = param_or(p, key, fallback);
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw std::invalid_argument("parameter '" + key + "' must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

void SystemDefinition::validate() const {
  if (dim < 1) throw std::invalid_argument("system '" + name + "' has dimension 0");
  if (initial_condition.size() != dim) {
    throw std::invalid_argument("system '" + name +
                                "': initial condition dimension does not match");
  }
  if (!(t_end > t0)) throw std::invalid_argument("system '" + name + "': need t_end > t0");
  if (!rhs) throw std::invalid_argument("system '" + name + "' has no right-hand side");
  State du(dim);
  rhs(t0, initial_condition, du);
  if (!all_finite(du)) {
    throw std::invalid_argument("system '" + name +
                                "': rhs is not finite at the initial condition");
  }
}

NormalizationMap::NormalizationMap(std::vector<CoordinateBounds> bounds)
    : bounds_(std::move(bounds)), scale_(bounds_.size()) {
  for (std::size_t j = 0; j < bounds_.size(); ++j) {
    const auto& b = bounds_[j];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.hi > b.lo)) {
      std::ostringstream os;
      os << "degenerate normalization bounds for coordinate " << j << ": [" << b.lo << ", "
         << b.hi << "]";
      throw std::invalid_argument(os.str());
    }
    scale_[j] = 2.0 / (b.hi - b.lo);
  }
}

NormalizationMap NormalizationMap::from_samples(const std::vector<State>& samples,
                                                double margin) {
  if (samples.empty()) throw std::invalid_argument("normalization needs at least one sample");
  const std::size_t d = samples.front().size();
  std::vector<CoordinateBounds> bounds(d);
  for (std::size_t j = 0; j < d; ++j) {
    double lo = samples.front()[j];
    double hi = lo;
    for (const auto& s : samples) {
      lo = std::min(lo, s[j]);
      hi = std::max(hi, s[j]);
    }
    double pad = margin * (hi - lo);
    if (!(hi > lo)) pad = margin * std::max(std::abs(lo), 1.0);
    bounds[j] = {lo - pad, hi + pad};
  }
  return NormalizationMap(std::move(bounds));
}

NormalizationMap NormalizationMap::identity(std::size_t dim) {
  return NormalizationMap(std::vector<CoordinateBounds>(dim, CoordinateBounds{-1.0, 1.0}));
}

State NormalizationMap::normalize(std::span<const double> u) const {
  State v(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    v[j] = scale_[j] * (u[j] - bounds_[j].lo) - 1.0;
  }
  return v;
}

State NormalizationMap::denormalize(std::span<const double> v) const {
  State u(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    u[j] = (v[j] + 1.0) / scale_[j] + bounds_[j].lo;
  }
  return u;
}

const std::vector<std::string>& ode_system_names() {
  static const std::vector<std::string> names = {
      "fhn", "rossler", "brusselator", "double_pendulum", "lorenz", "hopf", "thomas"};
  return names;
}

SystemDefinition make_ode_system(const std::string& name, const ParameterMap& params) {
  if (name == "fhn") return fhn(params);
  if (name == "rossler") return rossler(params);
  if (name == "brusselator") return brusselator(params);
  if (name == "double_pendulum") return double_pendulum(params);
  if (name == "lorenz") return lorenz(params);
  if (name == "hopf") return hopf(params);
  if (name == "thomas") return thomas(params);
  throw std::invalid_argument("unknown system '" + name + "'");
}

SystemDefinition discretize_heat(std::size_t d, double length, double alpha,
                                 const std::function<double(double)>& u0_profile) {
  if (d < 2) throw std::invalid_argument("heat: need d >= 2 grid intervals");
  require_positive("heat", "L", length);
  require_positive("heat", "alpha", alpha);
  const double dx = length / static_cast<double>(d);
  const std::size_t n = d - 1;
  const double coeff = alpha / (dx * dx);
  SystemDefinition s;
  s.name = "heat";
  s.dim = n;
  s.rhs = [n, coeff](double, std::span<const double> u, std::span<double> du) {
    for (std::size_t j = 0; j < n; ++j) {
      const double left = j == 0 ? 0.0 : u[j - 1];
      const double right = j + 1 == n ? 0.0 : u[j + 1];
      du[j] = coeff * (left - 2.0 * u[j] + right);
    }
  };
  s.initial_condition.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    s.initial_condition[j] = u0_profile(static_cast<double>(j + 1) * dx);
  }
  s.t0 = 0.0;
  s.t_end = 2.0;
  s.parameters = {{"d", static_cast<double>(d)}, {"L", length}, {"alpha", alpha}};
  return s;
}

SystemDefinition discretize_burgers(std::size_t d, double half_length, double nu,
                                    const std::function<double(double)>& v0_profile) {
  if (d < 2) throw std::invalid_argument("burgers: need d >= 2");
  require_positive("burgers", "L", half_length);
  require_positive("burgers", "nu", nu);
  const double dx = 2.0 * half_length / static_cast<double>(d);
  const double diff = nu / (dx * dx);
  const double adv = 1.0 / (2.0 * dx);
  SystemDefinition s;
  s.name = "burgers";
  s.dim = d;
  s.rhs = [d, diff, adv](double, std::span<const double> v, std::span<double> dv) {
    for (std::size_t j = 0; j < d; ++j) {
      const double left = v[j == 0 ? d - 1 : j - 1];
      const double right = v[j + 1 == d ? 0 : j + 1];
      dv[j] = diff * (left - 2.0 * v[j] + right) - v[j] * adv * (right - left);
    }
  };
  s.initial_condition.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    s.initial_condition[j] = v0_profile(-half_length + static_cast<double>(j) * dx);
  }
  s.t0 = 0.0;
  s.t_end = 5.0;
  s.parameters = {{"d", static_cast<double>(d)}, {"L", half_length}, {"nu", nu}};
  return s;
}

SystemDefinition discretize_fhn2d(std::size_t d_tilde, double half_length,
                                  const Fhn2dParams& params, std::uint64_t seed) {
  if (d_tilde < 3) throw std::invalid_argument("fhn_pde: need d_tilde >= 3");
  require_positive("fhn_pde", "L", half_length);
  require_positive("fhn_pde", "a", params.a);
  require_positive("fhn_pde", "b", params.b);
  require_positive("fhn_pde", "tau", params.tau);
  if (!std::isfinite(params.c)) throw std::invalid_argument("fhn_pde: c must be finite");
  const std::size_t g = d_tilde;
  const std::size_t cells = g * g;
  const double h = 2.0 * half_length / static_cast<double>(g);
  const double inv_h2 = 1.0 / (h * h);
  SystemDefinition s;
  s.name = "fhn_pde";
  s.dim = 2 * cells;
  s.rhs = [g, cells, inv_h2, params](double, std::span<const double> u, std::span<double> du) {
    const auto lap = [&](std::size_t offset, std::size_t r, std::size_t c) {
      const std::size_t up = r == 0 ? g - 1 : r - 1;
      const std::size_t down = r + 1 == g ? 0 : r + 1;
      const std::size_t left = c == 0 ? g - 1 : c - 1;
      const std::size_t right = c + 1 == g ? 0 : c + 1;
      const double centre = u[offset + r * g + c];
      return inv_h2 * (u[offset + up * g + c] + u[offset + down * g + c] +
                       u[offset + r * g + left] + u[offset + r * g + right] - 4.0 * centre);
    };
    for (std::size_t r = 0; r < g; ++r) {
      for (std::size_t c = 0; c < g; ++c) {
        const std::size_t idx = r * g + c;
        const double v = u[idx];
        const double w = u[cells + idx];
        du[idx] = params.a * lap(0, r, c) + v - v * v * v - w - params.c;
        du[cells + idx] = params.tau * (params.b * lap(cells, r, c) + v - w);
      }
    }
  };
  s.initial_condition.resize(2 * cells);
  SplitMix64 rng(seed);
  for (auto& x : s.initial_condition) x = rng.uniform01();
  s.t0 = 0.0;
  s.t_end = g <= 10 ? 150.0 : g <= 12 ? 550.0 : g <= 14 ? 950.0 : 1100.0;
  s.parameters = {{"d_tilde", static_cast<double>(d_tilde)},
                  {"L", half_length},
                  {"a", params.a},
                  {"b", params.b},
                  {"c", params.c},
                  {"tau", params.tau}};
  return s;
}

SystemDefinition normalize_system(const SystemDefinition& system, const NormalizationMap& map) {
  if (map.dim() != system.dim) {
    throw std::invalid_argument("normalization map dimension does not match the system");
  }
  SystemDefinition out = system;
  out.initial_condition = map.normalize(system.initial_condition);
  out.normalization_bounds = map.bounds();
  auto inner = system.rhs;
  const std::size_t d = system.dim;
  out.rhs = [inner, map, d](double t, std::span<const double> v, std::span<double> dv) {
    thread_local State u;
    u.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      u[j] = (v[j] + 1.0) / map.scale(j) + map.bounds()[j].lo;
    }
    inner(t, u, dv);
    for (std::size_t j = 0; j < d; ++j) dv[j] *= map.scale(j);
  };
  return out;
}

SystemDefinition make_system(const std::string& name, const ParameterMap& params,
                             std::uint64_t seed) {
  if (name == "heat") {
    reject_unknown(name, params, {"d", "L", "alpha"});
    const auto d = size_param(params, "d", 40);
    const double length = param_or(params, "L", 1.0);
    return discretize_heat(d, length, param_or(params, "alpha", 0.1),
                           [length](double x) { return std::sin(2.0 * pi * x / length); });
  }
  if (name == "burgers") {
    reject_unknown(name, params, {"d", "L", "nu"});
    return discretize_burgers(size_param(params, "d", 128), param_or(params, "L", 1.0),
                              param_or(params, "nu", 0.01), [](double x) {
                                return 0.5 * (std::cos(4.5 * pi * x) + 1.0);
                              });
  }
  if (name == "fhn_pde") {
    reject_unknown(name, params, {"d_tilde", "L", "a", "b", "c", "tau"});
    for (const char* key : {"a", "b", "c", "tau"}) {
      if (!params.contains(key)) {
        throw std::invalid_argument(std::string("fhn_pde: parameter '") + key +
                                    "' has no default and must be set");
      }
    }
    Fhn2dParams p{params.at("a"), params.at("b"), params.at("c"), params.at("tau")};
    return discretize_fhn2d(size_param(params, "d_tilde", 10), param_or(params, "L", 1.0), p,
                            seed);
  }
  return make_ode_system(name, params);
}

}  // namespace pintlab

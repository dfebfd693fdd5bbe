#include "pintlab/integrators.hpp"

#include <cmath>
#include <sstream>

namespace pintlab {

namespace {

ButcherTableau make_euler() { return {1, {0.0}, {1.0}, {{}}}; }

ButcherTableau make_midpoint() { return {2, {0.0, 0.5}, {0.0, 1.0}, {{}, {0.5}}}; }

ButcherTableau make_classical_rk4() {
  return {4,
         {0.0, 0.5, 0.5, 1.0},
         {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
         {{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}}};
}

// Dormand-Prince 8(5,3), 12 stages; only the 8th-order solution weights are kept.
ButcherTableau make_dop853() {
  ButcherTableau t;
  t.order = 8;
  t.c = {0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726,
         0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6,
         0.8571428571428571, 1.0};
  t.b = {0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003,
         -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034,
         0.04471061572777259};
  t.a = {{},
         {0.05260015195876773},
         {0.0197250569845379, 0.0591751709536137},
         {0.02958758547680685, 0.0, 0.08876275643042054},
         {0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792},
         {0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242},
         {0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125},
         {0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328,
          -0.015319437748624402, 0.008273789163814023},
         {0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726,
          27.59209969944671, 20.154067550477894, -43.48988418106996},
         {0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843,
          21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627},
         {-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295,
          -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523,
          -3.0467644718982196},
         {2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625,
          -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063,
          12.360567175794303, 0.6433927460157636}};
  return t;
}

}  // namespace

bool is_supported_order(int order) {
  return order == 1 || order == 2 || order == 4 || order == 8;
}

void SolverSpec::validate() const {
  if (!is_supported_order(order)) {
    throw std::invalid_argument("unsupported Runge-Kutta order " + std::to_string(order) +
                               " (expected 1, 2, 4 or 8)");
  }
  if (steps_per_interval < 1) {
    throw std::invalid_argument("steps_per_interval must be >= 1");
  }
}

std::string SolverSpec::describe() const {
  std::ostringstream os;
  os << "RK" << order << "/" << steps_per_interval;
  return os.str();
}

const ButcherTableau& tableau_for_order(int order) {
  static const ButcherTableau euler = make_euler();
  static const ButcherTableau midpoint = make_midpoint();
  static const ButcherTableau rk4 = make_classical_rk4();
  static const ButcherTableau rk8 = make_dop853();
  switch (order) {
    case 1: return euler;
    case 2: return midpoint;
    case 4: return rk4;
    case 8: return rk8;
    default:
      throw std::invalid_argument("unsupported Runge-Kutta order " + std::to_string(order));
  }
}

bool all_finite(std::span<const double> u) {
  for (double x : u) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

RkStepper::RkStepper(int order, std::size_t dim)
    : tableau_(&tableau_for_order(order)),
      dim_(dim),
      stages_(tableau_->stages(), std::vector<double>(dim)),
      trial_(dim) {}

void RkStepper::step(const RhsFunction& rhs, std::span<double> u, double t, double dt) {
  const auto& tab = *tableau_;
  const std::size_t s = tab.stages();
  for (std::size_t i = 0; i < s; ++i) {
    const auto& row = tab.a[i];
    std::copy(u.begin(), u.end(), trial_.begin());
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double w = dt * row[j];
      if (w == 0.0) continue;
      const auto& kj = stages_[j];
      for (std::size_t q = 0; q < dim_; ++q) trial_[q] += w * kj[q];
    }
    rhs(t + tab.c[i] * dt, trial_, stages_[i]);
  }
  for (std::size_t i = 0; i < s; ++i) {
    const double w = dt * tab.b[i];
    if (w == 0.0) continue;
    const auto& ki = stages_[i];
    for (std::size_t q = 0; q < dim_; ++q) u[q] += w * ki[q];
  }
}

State rk_step(int order, const RhsFunction& rhs, std::span<const double> u, double t,
             double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk_step: dt must be positive");
  RkStepper stepper(order, u.size());
  State out(u.begin(), u.end());
  stepper.step(rhs, out, t, dt);
  if (!all_finite(out)) throw SolverDivergence("rk_step produced a non-finite state");
  return out;
}

State integrate_interval(const SolverSpec& spec, const RhsFunction& rhs,
                        std::span<const double> u0, double t_start, double t_end) {
  spec.validate();
  if (!(t_end > t_start)) {
    throw std::invalid_argument("integrate_interval: t_end must exceed t_start");
  }
  RkStepper stepper(spec.order, u0.size());
  State u(u0.begin(), u0.end());
  const double dt = (t_end - t_start) / static_cast<double>(spec.steps_per_interval);
  for (long n = 0; n < spec.steps_per_interval; ++n) {
    stepper.step(rhs, u, t_start + static_cast<double>(n) * dt, dt);
  }
  if (!all_finite(u)) {
    std::ostringstream os;
    os << spec.describe() << " diverged on [" << t_start << ", " << t_end << "]";
    throw SolverDivergence(os.str());
  }
  return u;
}

}  // namespace pintlab

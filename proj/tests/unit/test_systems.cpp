#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pintlab/systems.hpp"

using namespace pintlab;
using std::numbers::pi;

namespace {

using Oracle = std::function<State(const State&)>;

State eval(const SystemDefinition& s, const State& u) {
  State du(s.dim);
  s.rhs(s.t0, u, du);
  return du;
}

void check_close(const State& got, const State& want, double rel) {
  REQUIRE(got.size() == want.size());
  for (std::size_t j = 0; j < got.size(); ++j) {
    CHECK(std::abs(got[j] - want[j]) <= rel * std::max(1.0, std::abs(want[j])));
  }
}

}  // namespace

TEST_CASE("ode right-hand sides agree with written-out equations") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ud(-3.0, 3.0);
  const std::map<std::string, Oracle> oracles = {
      {"fhn",
       [](const State& u) {
         return State{3.0 * (u[0] - std::pow(u[0], 3) / 3.0 + u[1]),
                      -(1.0 / 3.0) * (u[0] - 0.2 + 0.2 * u[1])};
       }},
      {"rossler",
       [](const State& u) {
         return State{-u[1] - u[2], u[0] + 0.2 * u[1], 0.2 + u[2] * (u[0] - 5.7)};
       }},
      {"brusselator",
       [](const State& u) {
         return State{1.0 + u[0] * u[0] * u[1] - 4.0 * u[0], 3.0 * u[0] - u[0] * u[0] * u[1]};
       }},
      {"lorenz",
       [](const State& u) {
         return State{10.0 * (u[1] - u[0]), u[0] * (28.0 - u[2]) - u[1],
                      u[0] * u[1] - 8.0 / 3.0 * u[2]};
       }},
      {"thomas",
       [](const State& u) {
         return State{10.0 * std::sin(u[1]) - 0.5 * u[0], 10.0 * std::sin(u[2]) - 0.5 * u[1],
                      10.0 * std::sin(u[0]) - 0.5 * u[2]};
       }},
      {"hopf",
       [](const State& u) {
         const double r2 = u[0] * u[0] + u[1] * u[1];
         return State{-u[1] + u[0] * (u[2] / 500.0 - r2), u[0] + u[1] * (u[2] / 500.0 - r2),
                      1.0};
       }},
      {"double_pendulum",
       [](const State& u) {
         // Solve the 2x2 mass-matrix system of the unit double pendulum directly.
         const double d = u[0] - u[1];
         const double m11 = 2.0, m12 = std::cos(d), m22 = 1.0;
         const double r1 = -u[3] * u[3] * std::sin(d) - 2.0 * std::sin(u[0]);
         const double r2 = u[2] * u[2] * std::sin(d) - std::sin(u[1]);
         const double det = m11 * m22 - m12 * m12;
         return State{u[2], u[3], (r1 * m22 - m12 * r2) / det, (m11 * r2 - m12 * r1) / det};
       }},
  };
  for (const auto& name : ode_system_names()) {
    CAPTURE(name);
    const auto sys = make_ode_system(name);
    REQUIRE(oracles.contains(name));
    for (int trial = 0; trial < 100; ++trial) {
      State u(sys.dim);
      for (auto& x : u) x = ud(gen);
      check_close(eval(sys, u), oracles.at(name)(u), 1e-12);
    }
  }
}

TEST_CASE("reference systems validate and reject bad parameters") {
  for (const auto& name : ode_system_names()) {
    CAPTURE(name);
    CHECK_NOTHROW(make_ode_system(name).validate());
  }
  CHECK_THROWS_AS(make_ode_system("lorenz", {{"sigma", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_ode_system("fhn", {{"c", 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_ode_system("nope"), std::invalid_argument);
  CHECK_THROWS_AS(make_system("fhn_pde", {{"a", 1.0}}, 0), std::invalid_argument);
}

TEST_CASE("heat discretization equals the dense tridiagonal matrix") {
  const std::size_t d = 12;
  const double alpha = 0.3, len = 2.0;
  const auto sys = discretize_heat(d, len, alpha, [](double x) { return x * (2.0 - x); });
  REQUIRE(sys.dim == d - 1);
  const double dx = len / d;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  State u(sys.dim);
  for (auto& x : u) x = nd(gen);
  State want(sys.dim, 0.0);
  for (std::size_t i = 0; i < sys.dim; ++i) {
    for (std::size_t j = 0; j < sys.dim; ++j) {
      double a = 0.0;
      if (i == j) a = -2.0;
      if (i + 1 == j || j + 1 == i) a = 1.0;
      want[i] += alpha / (dx * dx) * a * u[j];
    }
  }
  check_close(eval(sys, u), want, 1e-12);
  CHECK(sys.initial_condition.front() == doctest::Approx(dx * (2.0 - dx)));
}

TEST_CASE("heat semi-discrete sine mode decays at the discrete eigenvalue") {
  auto sys = make_system("heat", {}, 0);
  const double dx = 1.0 / 40.0;
  const double lambda = -4.0 * 0.1 / (dx * dx) * std::pow(std::sin(pi * dx), 2);
  const State du = eval(sys, sys.initial_condition);
  for (std::size_t j = 0; j < sys.dim; ++j) {
    CHECK(du[j] == doctest::Approx(lambda * sys.initial_condition[j]).epsilon(1e-10));
  }
  const State y = integrate_interval({8, 400}, sys.rhs, sys.initial_condition, 0.0, 2.0);
  for (std::size_t j = 0; j < sys.dim; ++j) {
    CHECK(std::abs(y[j] - std::exp(2.0 * lambda) * sys.initial_condition[j]) < 1e-12);
  }
}

TEST_CASE("burgers and fhn_pde stencils match a direct periodic oracle") {
  const std::size_t d = 16;
  const double half = 1.0, nu = 0.05;
  const auto b = discretize_burgers(d, half, nu, [](double x) { return std::sin(pi * x); });
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  State v(d);
  for (auto& x : v) x = nd(gen);
  const double dx = 2.0 * half / d;
  State want(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double l = v[(j + d - 1) % d], r = v[(j + 1) % d];
    want[j] = nu * (l - 2.0 * v[j] + r) / (dx * dx) - v[j] * (r - l) / (2.0 * dx);
  }
  check_close(eval(b, v), want, 1e-12);

  const std::size_t g = 5;
  const Fhn2dParams p{0.7, 1.1, 0.2, 0.9};
  const auto f = discretize_fhn2d(g, 1.0, p, 42);
  REQUIRE(f.dim == 2 * g * g);
  for (double x : f.initial_condition) CHECK((x >= 0.0 && x < 1.0));
  State u(f.dim);
  for (auto& x : u) x = nd(gen);
  const double h = 2.0 / g;
  auto at = [&](std::size_t field, long r, long c) {
    const long gg = static_cast<long>(g);
    return u[field * g * g + static_cast<std::size_t>(((r + gg) % gg) * gg + (c + gg) % gg)];
  };
  State fw(f.dim);
  for (long r = 0; r < static_cast<long>(g); ++r) {
    for (long c = 0; c < static_cast<long>(g); ++c) {
      const std::size_t k = static_cast<std::size_t>(r) * g + static_cast<std::size_t>(c);
      auto lap = [&](std::size_t fld) {
        return (at(fld, r - 1, c) + at(fld, r + 1, c) + at(fld, r, c - 1) + at(fld, r, c + 1) -
                4.0 * at(fld, r, c)) /
               (h * h);
      };
      const double vv = at(0, r, c), ww = at(1, r, c);
      fw[k] = p.a * lap(0) + vv - vv * vv * vv - ww - p.c;
      fw[g * g + k] = p.tau * (p.b * lap(1) + vv - ww);
    }
  }
  check_close(eval(f, u), fw, 1e-12);
  const auto f2 = discretize_fhn2d(g, 1.0, p, 42);
  CHECK(f2.initial_condition == f.initial_condition);
}

TEST_CASE("second-order stencils: residual shrinks about fourfold per refinement") {
  auto residual = [](std::size_t d) {
    const auto s = discretize_heat(d, 1.0, 1.0, [](double x) { return std::sin(pi * x); });
    const State du = eval(s, s.initial_condition);
    double worst = 0.0;
    for (std::size_t j = 0; j < s.dim; ++j) {
      const double x = static_cast<double>(j + 1) / static_cast<double>(d);
      worst = std::max(worst, std::abs(du[j] + pi * pi * std::sin(pi * x)));
    }
    return worst;
  };
  auto burgers_residual = [](std::size_t d) {
    const auto s = discretize_burgers(d, 1.0, 0.1, [](double x) { return std::sin(pi * x); });
    const State du = eval(s, s.initial_condition);
    double worst = 0.0;
    for (std::size_t j = 0; j < s.dim; ++j) {
      const double x = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(d);
      const double exact =
          -0.1 * pi * pi * std::sin(pi * x) - std::sin(pi * x) * pi * std::cos(pi * x);
      worst = std::max(worst, std::abs(du[j] - exact));
    }
    return worst;
  };
  for (std::size_t d : {16u, 32u, 64u}) {
    CHECK(residual(d) / residual(2 * d) == doctest::Approx(4.0).epsilon(0.05));
    CHECK(burgers_residual(d) / burgers_residual(2 * d) == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("normalization round trip and mapped rhs") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> ud(-50.0, 50.0);
  const auto sys = make_ode_system("lorenz");
  std::vector<State> samples;
  for (int i = 0; i < 20; ++i) samples.push_back({ud(gen), ud(gen), ud(gen)});
  const auto map = NormalizationMap::from_samples(samples, 0.1);
  for (const auto& s : samples) {
    const State v = map.normalize(s);
    for (double x : v) CHECK(std::abs(x) <= 1.0 / 1.2 + 1e-12);
    const State back = map.denormalize(v);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(back[j] - s[j]) <= 1e-14 * std::max(1.0, std::abs(s[j])) * 8);
    }
  }
  for (std::size_t j = 0; j < 3; ++j) {
    const auto& b = map.bounds()[j];
    CHECK(map.normalize(State{b.lo, b.lo, b.lo})[j] == doctest::Approx(-1.0));
    CHECK(map.normalize(State{b.hi, b.hi, b.hi})[j] == doctest::Approx(1.0));
  }
  const auto ns = normalize_system(sys, map);
  const State u = samples[3];
  const State v = map.normalize(u);
  const State du = eval(sys, u);
  const State dv = eval(ns, v);
  for (std::size_t j = 0; j < 3; ++j) CHECK(dv[j] == doctest::Approx(map.scale(j) * du[j]));
  CHECK_THROWS_AS(NormalizationMap({{1.0, 1.0}}), std::invalid_argument);
  const auto flat = NormalizationMap::from_samples({{2.0}, {2.0}}, 0.1);
  CHECK(flat.bounds()[0].hi > flat.bounds()[0].lo);
}

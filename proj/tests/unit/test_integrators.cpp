#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "pintlab/integrators.hpp"

using namespace pintlab;

namespace {

const RhsFunction exp_rhs = [](double, std::span<const double> u, std::span<double> du) {
  du[0] = u[0];
};

double exp_error(int order, long steps) {
  const State y = integrate_interval({order, steps}, exp_rhs, State{1.0}, 0.0, 1.0);
  return std::abs(y[0] - std::exp(1.0));
}

}  // namespace

TEST_CASE("forward Euler on du/dt = u is the compound product") {
  for (long n : {1L, 3L, 10L, 64L}) {
    const State y = integrate_interval({1, n}, exp_rhs, State{1.0}, 0.0, 1.0);
    CHECK(y[0] == doctest::Approx(std::pow(1.0 + 1.0 / n, n)).epsilon(1e-14));
  }
}

TEST_CASE("order slopes over dyadic refinement") {
  for (int p : {1, 2, 4}) {
    long n = p == 4 ? 4 : 16;
    for (int r = 0; r < 4; ++r, n *= 2) {
      const double slope = std::log2(exp_error(p, n) / exp_error(p, 2 * n));
      CHECK(slope == doctest::Approx(p).epsilon(0.1));
    }
  }
  // Eighth order reaches round-off almost immediately, so only the first halving is used.
  const double slope8 = std::log2(exp_error(8, 2) / exp_error(8, 4));
  CHECK(slope8 == doctest::Approx(8.0).epsilon(0.1));
}

TEST_CASE("butcher tableaux satisfy row-sum and quadrature conditions") {
  for (int p : {1, 2, 4, 8}) {
    const auto& t = tableau_for_order(p);
    CHECK(t.order == p);
    double bsum = 0.0;
    for (double b : t.b) bsum += b;
    CHECK(bsum == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < t.stages(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < i; ++j) row += t.a[i][j];
      CHECK(row == doctest::Approx(t.c[i]).epsilon(1e-13));
      for (std::size_t j = i; j < t.a[i].size(); ++j) CHECK(t.a[i][j] == 0.0);
    }
    // sum b_i c_i^{q-1} = 1/q for q <= p
    for (int q = 1; q <= p; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < t.stages(); ++i) s += t.b[i] * std::pow(t.c[i], q - 1);
      CHECK(s == doctest::Approx(1.0 / q).epsilon(1e-12));
    }
  }
}

TEST_CASE("linear rhs gives superposition") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  const std::size_t d = 5;
  std::vector<double> a(d * d);
  for (auto& x : a) x = 0.3 * nd(gen);
  RhsFunction lin = [&a, d](double, std::span<const double> u, std::span<double> du) {
    for (std::size_t i = 0; i < d; ++i) {
      du[i] = 0.0;
      for (std::size_t j = 0; j < d; ++j) du[i] += a[i * d + j] * u[j];
    }
  };
  for (int p : {1, 2, 4, 8}) {
    State x(d), y(d), xy(d);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = nd(gen);
      y[i] = nd(gen);
      xy[i] = 2.0 * x[i] - 3.0 * y[i];
    }
    const SolverSpec spec{p, 13};
    const State fx = integrate_interval(spec, lin, x, 0.0, 1.7);
    const State fy = integrate_interval(spec, lin, y, 0.0, 1.7);
    const State fxy = integrate_interval(spec, lin, xy, 0.0, 1.7);
    for (std::size_t i = 0; i < d; ++i) {
      const double expect = 2.0 * fx[i] - 3.0 * fy[i];
      CHECK(std::abs(fxy[i] - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST_CASE("repeated integration is bitwise identical") {
  RhsFunction vdp = [](double, std::span<const double> u, std::span<double> du) {
    du[0] = u[1];
    du[1] = 2.0 * (1.0 - u[0] * u[0]) * u[1] - u[0];
  };
  for (int p : {1, 2, 4, 8}) {
    const State a = integrate_interval({p, 200}, vdp, State{2.0, 0.0}, 0.0, 3.0);
    const State b = integrate_interval({p, 200}, vdp, State{2.0, 0.0}, 0.0, 3.0);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("non-autonomous rhs sees stage times") {
  RhsFunction f = [](double t, std::span<const double>, std::span<double> du) {
    du[0] = 3.0 * t * t;
  };
  const State y = integrate_interval({4, 1}, f, State{0.0}, 1.0, 2.0);
  CHECK(y[0] == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("invalid specs and divergence are reported") {
  CHECK_THROWS_AS(SolverSpec({3, 1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(SolverSpec({4, 0}).validate(), std::invalid_argument);
  CHECK_FALSE(is_supported_order(5));
  RhsFunction blow = [](double, std::span<const double> u, std::span<double> du) {
    du[0] = u[0] * u[0];
  };
  CHECK_THROWS_AS(integrate_interval({1, 50}, blow, State{1e200}, 0.0, 1.0), SolverDivergence);
}

#include "pintlab/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pintlab {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty starting point");
  constexpr double inf = std::numeric_limits<double>::infinity();
  NelderMeadResult result;

  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : inf;
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t j = 0; j < n; ++j) {
    simplex[j + 1][j] = x0[j] != 0.0 ? 1.05 * x0[j] : 0.00025;
  }
  std::vector<double> fv(n + 1);
  for (std::size_t v = 0; v <= n; ++v) fv[v] = eval(simplex[v]);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s(n + 1);
    std::vector<double> g(n + 1);
    for (std::size_t v = 0; v <= n; ++v) {
      s[v] = std::move(simplex[order[v]]);
      g[v] = fv[order[v]];
    }
    simplex = std::move(s);
    fv = std::move(g);
  };
  sort_simplex();

  if (!std::isfinite(fv[0])) {
    result.x = simplex[0];
    result.f = inf;
    return result;
  }

  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto affine = [&](std::vector<double>& out, double t) {
    // out = centroid + t * (centroid - worst)
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (centroid[j] - simplex[n][j]);
  };

  while (result.iterations < options.max_iter) {
    if (std::isfinite(fv[n]) && fv[n] - fv[0] <= options.f_tol) {
      result.converged = true;
      break;
    }
    ++result.iterations;
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[v][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    affine(xr, 1.0);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      affine(xe, 2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
    } else {
      bool shrink = false;
      if (fr < fv[n]) {
        affine(xc, 0.5);
        const double fc = eval(xc);
        if (fc <= fr) {
          simplex[n] = xc;
          fv[n] = fc;
        } else {
          shrink = true;
        }
      } else {
        affine(xc, -0.5);
        const double fc = eval(xc);
        if (fc < fv[n]) {
          simplex[n] = xc;
          fv[n] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t v = 1; v <= n; ++v) {
          for (std::size_t j = 0; j < n; ++j) {
            simplex[v][j] = simplex[0][j] + 0.5 * (simplex[v][j] - simplex[0][j]);
          }
          fv[v] = eval(simplex[v]);
        }
      }
    }
    sort_simplex();
  }
  if (!result.converged && std::isfinite(fv[n]) && fv[n] - fv[0] <= options.f_tol) {
    result.converged = true;
  }
  result.x = simplex[0];
  result.f = fv[0];
  return result;
}

}  // namespace pintlab

#pragma once

#include <functional>
#include <vector>

namespace pintlab {

struct NelderMeadOptions {
  int max_iter = 200;
  /// Stop once the spread of objective values across the simplex is at most this.
  double f_tol = 1e-6;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes `f` from `x0` with the standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, 1/2, 1/2). The initial simplex perturbs each coordinate by 5%
/// (0.00025 for zero entries). Non-finite objective values are treated as +inf. If
/// every initial vertex is non-finite the search stops immediately.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& options = {});

}  // namespace pintlab

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pintlab/integrators.hpp"

namespace pintlab {

/// Squared-exponential kernel parameters plus diagonal nugget.
struct GpHyperparams {
  double sigma_i_sq = 1.0;
  double sigma_o_sq = 1.0;
  double sigma_reg_sq = 0.0;

  void validate() const;
};

/// Raised when the regularized Gram matrix is not numerically positive definite.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when no restart at any nugget produced a finite likelihood.
class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sigma_o^2 exp(-|u - v|^2 / sigma_i^2).
double kernel_eval(std::span<const double> u, std::span<const double> v, const GpHyperparams& hp);

/// Row-wise inputs (n x d) -> pairwise squared Euclidean distances.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& inputs);

/// K(U, U) + sigma_reg^2 I.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& inputs, const GpHyperparams& hp);

/// -y^T A^{-1} y - log det A with A = K(U, U) + sigma_reg^2 I. The additive
/// constant -n log(2 pi) and the overall factor 1/2 of the Gaussian log density are
/// omitted, so this equals twice the usual log marginal likelihood plus n log(2 pi).
double log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                               const GpHyperparams& hp);

/// Same, from precomputed squared distances.
double log_marginal_likelihood_sq(const Eigen::MatrixXd& dist_sq, const Eigen::VectorXd& outputs,
                                  const GpHyperparams& hp);

/// Conditioned scalar GP. With zero training points it is the prior.
class ScalarGp {
 public:
  ScalarGp(Eigen::MatrixXd inputs, const Eigen::VectorXd& outputs, const GpHyperparams& hp);

  double mean(std::span<const double> query) const;

  /// Clamped at zero; values below -1e-10 are logged before clamping.
  double variance(std::span<const double> query) const;

  const GpHyperparams& hyperparams() const { return hp_; }
  std::size_t size() const { return static_cast<std::size_t>(inputs_.rows()); }

 private:
  Eigen::VectorXd cross_covariance(std::span<const double> query) const;

  Eigen::MatrixXd inputs_;
  GpHyperparams hp_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

struct FitOptions {
  int n_start = 10;
  std::vector<double> nugget_grid = {1e-20, 1e-16, 1e-13, 1e-10, 1e-8, 1e-6, 1e-4};
  int max_iter = 200;
  double f_tol = 1e-6;
  /// Initial log-scales are drawn uniformly from [init_lo, init_hi].
  double init_lo = -5.0;
  double init_hi = 5.0;
  /// Extra starting point (log sigma_i^2, log sigma_o^2) tried at every nugget.
  std::optional<std::pair<double, double>> warm_start;

  void validate() const;
};

struct FitResult {
  GpHyperparams hp;
  double log_likelihood = 0.0;
  int nugget_index = -1;
  int restart_index = -1;
  int evaluations = 0;
  int skipped_nuggets = 0;
};

/// Maximizes the log marginal likelihood over (log sigma_i^2, log sigma_o^2) with
/// Nelder-Mead restarts for every nugget in the grid and returns the best triple.
/// Exact ties are resolved towards the lowest (nugget index, restart index). Work is
/// spread over `workers` threads without affecting the result.
FitResult fit_hyperparams(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                          const FitOptions& options, std::uint64_t seed, unsigned workers = 1);

struct CorrectionDiagnostics {
  std::vector<FitResult> per_coordinate;
};

/// Fits an independent scalar GP per output coordinate on the shared inputs and
/// returns the vector of posterior means at `query`. `outputs` is n x d. Coordinate
/// s uses a seed derived from (`seed`, s). Throws FitFailure if a fit fails or a mean
/// is not finite.
State predict_correction(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                         std::span<const double> query, const FitOptions& options,
                         std::uint64_t seed, unsigned workers = 1,
                         CorrectionDiagnostics* diagnostics = nullptr);

}  // namespace pintlab

#include "pintlab/gp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pintlab/log.hpp"
#include "pintlab/nelder_mead.hpp"
#include "pintlab/parallel.hpp"
#include "pintlab/rng.hpp"

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace pintlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Gram entries at short length scales underflow into subnormals, which are slow on x86.
class FlushSubnormals {
 public:
#if defined(__SSE2__)
  FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~FlushSubnormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

struct Workspace {
  Eigen::MatrixXd a;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd z;
};

void fill_gram(const Eigen::MatrixXd& dist_sq, const GpHyperparams& hp, Eigen::MatrixXd& a) {
  a = (dist_sq.array() * (-1.0 / hp.sigma_i_sq)).exp() * hp.sigma_o_sq;
  // Vectorized exp can differ in the last bit between mirrored entries.
  a.triangularView<Eigen::StrictlyLower>() = a.transpose();
  a.diagonal().array() += hp.sigma_reg_sq;
}

// NaN when the factorization fails or the value is not finite.
double lml_core(const Eigen::MatrixXd& dist_sq, const Eigen::VectorXd& y,
                const GpHyperparams& hp, Workspace& ws) {
  if (!(hp.sigma_i_sq > 0.0) || !(hp.sigma_o_sq > 0.0) || !std::isfinite(hp.sigma_i_sq) ||
      !std::isfinite(hp.sigma_o_sq)) {
    return kNaN;
  }
  fill_gram(dist_sq, hp, ws.a);
  ws.llt.compute(ws.a);
  if (ws.llt.info() != Eigen::Success) return kNaN;
  const auto& l = ws.llt.matrixLLT();
  double logdet = 0.0;
  for (Eigen::Index j = 0; j < l.rows(); ++j) {
    const double p = l(j, j);
    if (!(p > 0.0)) return kNaN;
    logdet += std::log(p);
  }
  logdet *= 2.0;
  ws.z = y;
  ws.llt.matrixL().solveInPlace(ws.z);
  const double value = -ws.z.squaredNorm() - logdet;
  return std::isfinite(value) ? value : kNaN;
}

}  // namespace

void GpHyperparams::validate() const {
  if (!(sigma_i_sq > 0.0) || !(sigma_o_sq > 0.0) || !(sigma_reg_sq >= 0.0) ||
      !std::isfinite(sigma_i_sq) || !std::isfinite(sigma_o_sq) || !std::isfinite(sigma_reg_sq)) {
    std::ostringstream os;
    os << "invalid GP hyperparameters (" << sigma_i_sq << ", " << sigma_o_sq << ", "
       << sigma_reg_sq << ")";
    throw std::invalid_argument(os.str());
  }
}

void FitOptions::validate() const {
  if (n_start < 1) throw std::invalid_argument("gp.n_start must be at least 1");
  if (nugget_grid.empty()) throw std::invalid_argument("gp.nugget_grid must not be empty");
  for (double g : nugget_grid) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("invalid nugget value");
  }
  if (max_iter < 1) throw std::invalid_argument("gp.max_iter must be at least 1");
  if (!(f_tol > 0.0)) throw std::invalid_argument("gp.tol must be positive");
  if (!(init_hi >= init_lo)) throw std::invalid_argument("gp init range is empty");
}

double kernel_eval(std::span<const double> u, std::span<const double> v, const GpHyperparams& hp) {
  if (u.size() != v.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double diff = u[j] - v[j];
    s += diff * diff;
  }
  return hp.sigma_o_sq * std::exp(-s / hp.sigma_i_sq);
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& inputs) {
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    d(r, r) = 0.0;
    for (Eigen::Index q = r + 1; q < n; ++q) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
        const double diff = inputs(r, j) - inputs(q, j);
        s += diff * diff;
      }
      d(r, q) = s;
      d(q, r) = s;
    }
  }
  return d;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& inputs, const GpHyperparams& hp) {
  if (inputs.rows() < 1) throw std::invalid_argument("gram_matrix: need at least one input");
  hp.validate();
  Eigen::MatrixXd a;
  fill_gram(squared_distances(inputs), hp, a);
  return a;
}

double log_marginal_likelihood_sq(const Eigen::MatrixXd& dist_sq, const Eigen::VectorXd& outputs,
                                  const GpHyperparams& hp) {
  if (outputs.size() != dist_sq.rows()) {
    throw std::invalid_argument("log_marginal_likelihood: outputs length mismatch");
  }
  hp.validate();
  Workspace ws;
  const double v = lml_core(dist_sq, outputs, hp, ws);
  if (std::isnan(v)) throw FactorizationError("Gram matrix is not positive definite");
  return v;
}

double log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                               const GpHyperparams& hp) {
  return log_marginal_likelihood_sq(squared_distances(inputs), outputs, hp);
}

ScalarGp::ScalarGp(Eigen::MatrixXd inputs, const Eigen::VectorXd& outputs,
                   const GpHyperparams& hp)
    : inputs_(std::move(inputs)), hp_(hp) {
  hp_.validate();
  if (outputs.size() != inputs_.rows()) throw std::invalid_argument("ScalarGp: size mismatch");
  if (inputs_.rows() == 0) return;
  Eigen::MatrixXd a;
  fill_gram(squared_distances(inputs_), hp_, a);
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    throw FactorizationError("Gram matrix is not positive definite");
  }
  alpha_ = llt_.solve(outputs);
  // One step of iterative refinement.
  const Eigen::VectorXd residual = outputs - a * alpha_;
  alpha_ += llt_.solve(residual);
}

Eigen::VectorXd ScalarGp::cross_covariance(std::span<const double> query) const {
  if (static_cast<Eigen::Index>(query.size()) != inputs_.cols()) {
    throw std::invalid_argument("ScalarGp: query dimension mismatch");
  }
  Eigen::VectorXd k(inputs_.rows());
  for (Eigen::Index r = 0; r < inputs_.rows(); ++r) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < inputs_.cols(); ++j) {
      const double diff = inputs_(r, j) - query[static_cast<std::size_t>(j)];
      s += diff * diff;
    }
    k(r) = hp_.sigma_o_sq * std::exp(-s / hp_.sigma_i_sq);
  }
  return k;
}

double ScalarGp::mean(std::span<const double> query) const {
  if (inputs_.rows() == 0) return 0.0;
  return cross_covariance(query).dot(alpha_);
}

double ScalarGp::variance(std::span<const double> query) const {
  if (inputs_.rows() == 0) return hp_.sigma_o_sq;
  Eigen::VectorXd v = cross_covariance(query);
  llt_.matrixL().solveInPlace(v);
  const double var = hp_.sigma_o_sq - v.squaredNorm();
  if (var < 0.0) {
    if (var < -1e-10) {
      std::ostringstream os;
      os << "posterior variance " << var << " clamped to 0";
      log::warn(os.str());
    }
    return 0.0;
  }
  return var;
}

FitResult fit_hyperparams(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                          const FitOptions& options, std::uint64_t seed, unsigned workers) {
  options.validate();
  if (inputs.rows() < 1) throw std::invalid_argument("fit_hyperparams: need n >= 1");
  if (outputs.size() != inputs.rows()) {
    throw std::invalid_argument("fit_hyperparams: outputs length mismatch");
  }
  const Eigen::MatrixXd dist_sq = squared_distances(inputs);
  const std::size_t grid = options.nugget_grid.size();
  const std::size_t starts =
      static_cast<std::size_t>(options.n_start) + (options.warm_start ? 1 : 0);

  struct Slot {
    double lml = kNaN;
    double log_si = 0.0;
    double log_so = 0.0;
    int evaluations = 0;
  };
  std::vector<Slot> slots(grid * starts);
  NelderMeadOptions nm{options.max_iter, options.f_tol};

  parallel_for(slots.size(), workers, [&](std::size_t task) {
    const std::size_t g = task / starts;
    const std::size_t r = task % starts;
    std::vector<double> x0(2);
    if (r < static_cast<std::size_t>(options.n_start)) {
      SplitMix64 rng(derive_seed(seed, {g, r}));
      x0[0] = rng.uniform(options.init_lo, options.init_hi);
      x0[1] = rng.uniform(options.init_lo, options.init_hi);
    } else {
      x0[0] = options.warm_start->first;
      x0[1] = options.warm_start->second;
    }
    const double nugget = options.nugget_grid[g];
    const FlushSubnormals ftz;
    Workspace ws;
    auto objective = [&](const std::vector<double>& x) {
      const GpHyperparams hp{std::exp(x[0]), std::exp(x[1]), nugget};
      const double v = lml_core(dist_sq, outputs, hp, ws);
      return std::isnan(v) ? std::numeric_limits<double>::infinity() : -v;
    };
    const NelderMeadResult res = nelder_mead(objective, x0, nm);
    Slot& s = slots[task];
    s.evaluations = res.evaluations;
    if (std::isfinite(res.f)) {
      s.lml = -res.f;
      s.log_si = res.x[0];
      s.log_so = res.x[1];
    }
  });

  FitResult best;
  for (std::size_t g = 0; g < grid; ++g) {
    bool any = false;
    for (std::size_t r = 0; r < starts; ++r) {
      const Slot& s = slots[g * starts + r];
      best.evaluations += s.evaluations;
      if (std::isnan(s.lml)) continue;
      any = true;
      if (best.nugget_index < 0 || s.lml > best.log_likelihood) {
        best.log_likelihood = s.lml;
        best.hp = {std::exp(s.log_si), std::exp(s.log_so), options.nugget_grid[g]};
        best.nugget_index = static_cast<int>(g);
        best.restart_index = static_cast<int>(r);
      }
    }
    if (!any) ++best.skipped_nuggets;
  }
  if (best.nugget_index < 0) {
    std::ostringstream os;
    os << "hyperparameter fit failed: no finite likelihood over " << grid << " nuggets x "
       << starts << " restarts (n = " << inputs.rows() << ")";
    throw FitFailure(os.str());
  }
  return best;
}

State predict_correction(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                         std::span<const double> query, const FitOptions& options,
                         std::uint64_t seed, unsigned workers,
                         CorrectionDiagnostics* diagnostics) {
  if (inputs.rows() < 1) throw std::invalid_argument("predict_correction: empty subset");
  if (outputs.rows() != inputs.rows()) {
    throw std::invalid_argument("predict_correction: inputs/outputs row mismatch");
  }
  const std::size_t d = static_cast<std::size_t>(outputs.cols());
  State mean(d, kNaN);
  std::vector<FitResult> fits(d);
  std::vector<std::string> errors(d);
  const unsigned outer = std::min<unsigned>(workers, static_cast<unsigned>(d));
  const unsigned inner = std::max(1u, workers / std::max(1u, outer));
  parallel_for(d, outer, [&](std::size_t s) {
    const Eigen::VectorXd y = outputs.col(static_cast<Eigen::Index>(s));
    try {
      fits[s] = fit_hyperparams(inputs, y, options, derive_seed(seed, {s}), inner);
      ScalarGp gp(inputs, y, fits[s].hp);
      mean[s] = gp.mean(query);
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  });
  for (std::size_t s = 0; s < d; ++s) {
    if (!errors[s].empty()) {
      throw FitFailure("coordinate " + std::to_string(s) + ": " + errors[s]);
    }
    if (!std::isfinite(mean[s])) {
      throw FitFailure("coordinate " + std::to_string(s) + ": non-finite posterior mean");
    }
  }
  if (diagnostics) diagnostics->per_coordinate = std::move(fits);
  return mean;
}

}  // namespace pintlab

#include "pintlab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pintlab/log.hpp"
#include "pintlab/parallel.hpp"
#include "pintlab/rng.hpp"

namespace pintlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

enum SeedTag : std::uint64_t { kTagNeighbors = 1, kTagNnGp = 2, kTagFullGp = 3, kTagProfile = 4 };

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

CorrectorKind parse_corrector_kind(const std::string& tag) {
  if (tag == "parareal") return CorrectorKind::parareal;
  if (tag == "mnn" || tag == "mnn_uniform") return CorrectorKind::mnn_uniform;
  if (tag == "gparareal") return CorrectorKind::gparareal;
  if (tag == "nngparareal") return CorrectorKind::nngparareal;
  throw std::invalid_argument("unknown corrector '" + tag + "'");
}

std::string to_string(CorrectorKind kind) {
  switch (kind) {
    case CorrectorKind::parareal: return "parareal";
    case CorrectorKind::mnn_uniform: return "mnn_uniform";
    case CorrectorKind::gparareal: return "gparareal";
    case CorrectorKind::nngparareal: return "nngparareal";
  }
  return "?";
}

std::string CorrectorSpec::describe() const {
  switch (kind) {
    case CorrectorKind::mnn_uniform: return "mnn_uniform(m=" + std::to_string(m) + ")";
    case CorrectorKind::nngparareal:
      return "nngparareal(m=" + std::to_string(m) + ", " + to_string(strategy) + ")";
    default: return to_string(kind);
  }
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::budget_exhausted: return "budget_exhausted";
    case RunStatus::diverged: return "diverged";
  }
  return "?";
}

void PintConfig::validate() const {
  system.validate();
  if (n_intervals < 2) throw std::invalid_argument("pint.N must be at least 2");
  coarse.validate();
  fine.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("pint.epsilon must be positive");
  if ((corrector.kind == CorrectorKind::mnn_uniform ||
       corrector.kind == CorrectorKind::nngparareal) &&
      corrector.m < 1) {
    throw std::invalid_argument("corrector.m must be at least 1");
  }
  fit.validate();
  if (budget_seconds && !(*budget_seconds > 0.0)) {
    throw std::invalid_argument("budget.seconds must be positive");
  }
  if (normalization == NormalizationMode::explicit_bounds && bounds.size() != system.dim) {
    throw std::invalid_argument("normalization bounds must list one (lo, hi) pair per coordinate");
  }
  if (!(normalization_margin >= 0.0)) {
    throw std::invalid_argument("normalization.margin must be nonnegative");
  }
}

PintEngine::PintEngine(PintConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.workers == 0) config_.workers = 1;
}

double PintEngine::time_at(int i) const {
  const double t0 = config_.system.t0;
  const double tn = config_.system.t_end;
  if (i == config_.n_intervals) return tn;
  return t0 + (tn - t0) * static_cast<double>(i) / static_cast<double>(config_.n_intervals);
}

State PintEngine::coarse(int interval, std::span<const double> u) const {
  return integrate_interval(config_.coarse, working_.rhs, u, time_at(interval - 1),
                            time_at(interval));
}

State PintEngine::fine(int interval, std::span<const double> u) const {
  return integrate_interval(config_.fine, working_.rhs, u, time_at(interval - 1),
                            time_at(interval));
}

void PintEngine::coarse_init() {
  if (initialized_) throw std::logic_error("coarse_init called twice");
  start_ = Clock::now();
  const int n = config_.n_intervals;
  const std::size_t d = config_.system.dim;

  switch (config_.normalization) {
    case NormalizationMode::none:
      map_ = NormalizationMap::identity(d);
      working_ = config_.system;
      break;
    case NormalizationMode::explicit_bounds:
      map_ = NormalizationMap(config_.bounds);
      working_ = normalize_system(config_.system, map_);
      break;
    case NormalizationMode::from_coarse: {
      working_ = config_.system;
      std::vector<State> samples{config_.system.initial_condition};
      State u = config_.system.initial_condition;
      for (int i = 1; i <= n; ++i) {
        u = coarse(i, u);
        samples.push_back(u);
      }
      map_ = NormalizationMap::from_samples(samples, config_.normalization_margin);
      working_ = normalize_system(config_.system, map_);
      break;
    }
  }

  state_ = IterationState{};
  state_.store = std::make_unique<CorrectionStore>(d);
  state_.fine.assign(static_cast<std::size_t>(n) + 1, State{});
  state_.coarse.assign(static_cast<std::size_t>(n) + 1, State{});
  state_.coarse_valid.assign(static_cast<std::size_t>(n) + 1, false);
  state_.last_record.assign(static_cast<std::size_t>(n) + 1, 0);

  const auto t_start = Clock::now();
  std::vector<State> u0(static_cast<std::size_t>(n) + 1);
  u0[0] = working_.initial_condition;
  for (int i = 1; i <= n; ++i) {
    const auto t = Clock::now();
    u0[i] = coarse(i, u0[i - 1]);
    coarse_times_.push_back(seconds_since(t));
    state_.coarse[i] = u0[i];
    state_.coarse_valid[i] = true;
  }
  report_.t_init = seconds_since(t_start);
  state_.history.push_back(std::move(u0));
  initialized_ = true;
}

void PintEngine::fine_sweep() {
  if (!initialized_) throw std::logic_error("fine_sweep before coarse_init");
  if (done_) throw std::logic_error("fine_sweep after convergence");
  const int n = config_.n_intervals;
  const int k = state_.k + 1;
  const int first = state_.frontier + 1;
  const auto& u = state_.current();
  const std::size_t count = static_cast<std::size_t>(n - first + 1);

  pending_ = IterationRecord{};
  pending_.k = k;
  std::vector<double> f_time(count, 0.0);
  const auto t_sweep = Clock::now();
  parallel_for(count, config_.workers, [&](std::size_t j) {
    const int i = first + static_cast<int>(j);
    const auto t = Clock::now();
    state_.fine[i] = fine(i, u[i - 1]);
    f_time[j] = seconds_since(t);
    if (!state_.coarse_valid[i]) {
      state_.coarse[i] = coarse(i, u[i - 1]);
    }
  });
  pending_.t_fine = seconds_since(t_sweep);
  if (k == 1) fine_times_ = f_time;

  std::vector<CorrectionRecord> batch;
  batch.reserve(count);
  for (int i = first; i <= n; ++i) {
    state_.coarse_valid[i] = true;
    CorrectionRecord r;
    r.input = u[i - 1];
    r.output.resize(u[i - 1].size());
    for (std::size_t s = 0; s < r.output.size(); ++s) {
      r.output[s] = state_.fine[i][s] - state_.coarse[i][s];
    }
    r.interval = i;
    r.iteration = k - 1;
    state_.last_record[i] = state_.store->size() + batch.size();
    batch.push_back(std::move(r));
  }
  pending_.records_added = batch.size();
  state_.store->insert_batch(std::move(batch));
  pending_.dataset_size = state_.store->size();
}

State PintEngine::fallback(int interval) const {
  return state_.store->record(state_.last_record[interval]).output;
}

void PintEngine::fit_full_gp() {
  const auto& store = *state_.store;
  const std::size_t n = store.size();
  const std::size_t d = store.dim();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto data = gather_training_set(store, std::move(all));
  const Eigen::MatrixXd& x = data.inputs;
  const Eigen::MatrixXd& y = data.outputs;
  full_gp_.clear();
  full_gp_fits_.assign(d, FitResult{});
  std::vector<std::optional<ScalarGp>> gps(d);
  std::vector<std::string> errors(d);
  const unsigned outer = std::min<unsigned>(config_.workers, static_cast<unsigned>(d));
  const unsigned inner = std::max(1u, config_.workers / std::max(1u, outer));
  const auto k = static_cast<std::uint64_t>(state_.k);
  parallel_for(d, outer, [&](std::size_t s) {
    try {
      const Eigen::VectorXd ys = y.col(static_cast<Eigen::Index>(s));
      full_gp_fits_[s] =
          fit_hyperparams(x, ys, config_.fit, derive_seed(config_.seed, {kTagFullGp, k, s}), inner);
      gps[s].emplace(x, ys, full_gp_fits_[s].hp);
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  });
  for (std::size_t s = 0; s < d; ++s) {
    if (!errors[s].empty()) {
      log::warn("full GP fit failed at iteration " + std::to_string(state_.k) + ", coordinate " +
                std::to_string(s) + ": " + errors[s]);
      full_gp_.clear();
      return;
    }
  }
  for (auto& g : gps) full_gp_.push_back(std::move(*g));
  if (config_.gp_diagnostics) {
    for (std::size_t s = 0; s < d; ++s) {
      report_.gp_diagnostics.push_back({state_.k, 0, static_cast<int>(s), n,
                                        full_gp_fits_[s].hp, full_gp_fits_[s].log_likelihood,
                                        full_gp_fits_[s].evaluations});
    }
  }
}

State PintEngine::correction(const CorrectorSpec& c, int interval, std::span<const double> query,
                             int ordinal, bool* fell_back,
                             std::vector<GpDiagnosticEntry>* diag) {
  const auto& store = *state_.store;
  const std::size_t d = store.dim();
  const auto k = static_cast<std::uint64_t>(state_.k);
  const auto i = static_cast<std::uint64_t>(interval);
  auto use_fallback = [&](const std::string& why) {
    if (fell_back) {
      *fell_back = true;
      log::info("corrector fallback at k=" + std::to_string(state_.k) +
                ", interval " + std::to_string(interval) + ": " + why);
    }
    return fallback(interval);
  };

  switch (c.kind) {
    case CorrectorKind::parareal:
      return fallback(interval);

    case CorrectorKind::mnn_uniform: {
      const auto nb = store.query_m_nearest(
          query, c.m,
          derive_seed(config_.seed, {kTagNeighbors, k, i, static_cast<std::uint64_t>(ordinal)}));
      State out(d, 0.0);
      for (const auto& n : nb) {
        for (std::size_t s = 0; s < d; ++s) out[s] += store.record(n.index).output[s];
      }
      for (double& v : out) v /= static_cast<double>(nb.size());
      return out;
    }

    case CorrectorKind::gparareal: {
      if (full_gp_.size() != d) return use_fallback("no full GP available");
      State out(d);
      for (std::size_t s = 0; s < d; ++s) out[s] = full_gp_[s].mean(query);
      if (!all_finite(out)) return use_fallback("non-finite GP mean");
      return out;
    }

    case CorrectorKind::nngparareal: {
      const auto idx = store.select_subset(
          c.strategy, query, interval, state_.k, c.m,
          derive_seed(config_.seed, {kTagNeighbors, k, i, static_cast<std::uint64_t>(ordinal)}));
      const auto data = gather_training_set(store, idx);
      const Eigen::MatrixXd& x = data.inputs;
      const Eigen::MatrixXd& y = data.outputs;
      try {
        CorrectionDiagnostics cd;
        State out = predict_correction(
            x, y, query, config_.fit,
            derive_seed(config_.seed, {kTagNnGp, k, i, static_cast<std::uint64_t>(ordinal)}),
            config_.workers, diag ? &cd : nullptr);
        if (diag) {
          for (std::size_t s = 0; s < cd.per_coordinate.size(); ++s) {
            const auto& f = cd.per_coordinate[s];
            diag->push_back({state_.k, interval, static_cast<int>(s), idx.size(), f.hp,
                             f.log_likelihood, f.evaluations});
          }
        }
        return out;
      } catch (const std::exception& e) {
        return use_fallback(e.what());
      }
    }
  }
  return fallback(interval);
}

void PintEngine::update_sweep() {
  const int n = config_.n_intervals;
  state_.k += 1;
  const int first = state_.frontier + 1;
  const int last = config_.frontier == FrontierRule::interior ? n - 1 : n;
  std::vector<State> u = state_.current();

  double t_model = 0.0;
  if (config_.corrector.kind == CorrectorKind::gparareal) {
    const auto t = Clock::now();
    fit_full_gp();
    t_model += seconds_since(t);
  }

  double t_coarse = 0.0;
  int fallbacks = 0;
  std::vector<GpDiagnosticEntry>* diag =
      config_.gp_diagnostics ? &report_.gp_diagnostics : nullptr;
  if (first <= last) u[first] = state_.fine[first];
  for (int i = first + 1; i <= last; ++i) {
    auto t = Clock::now();
    State g = coarse(i, u[i - 1]);
    t_coarse += seconds_since(t);
    t = Clock::now();
    bool fell_back = false;
    const State f = correction(config_.corrector, i, u[i - 1], 0, &fell_back, diag);
    t_model += seconds_since(t);
    if (fell_back) ++fallbacks;
    State next = g;
    for (std::size_t s = 0; s < next.size(); ++s) next[s] += f[s];
    if (!all_finite(next)) {
      throw SolverDivergence("non-finite update at interval " + std::to_string(i) +
                             ", iteration " + std::to_string(state_.k));
    }
    state_.coarse[i] = std::move(g);
    u[i] = std::move(next);
  }
  if (config_.frontier == FrontierRule::interior) {
    u[n] = state_.fine[n];
    state_.coarse_valid[n] = false;
  }
  state_.history.push_back(std::move(u));
  pending_.t_coarse = t_coarse;
  pending_.t_model = t_model;
  pending_.fallbacks = fallbacks;
  report_.fallbacks += fallbacks;
}

int PintEngine::check_convergence() {
  const int n = config_.n_intervals;
  const int last = config_.frontier == FrontierRule::interior ? n - 1 : n;
  const auto& cur = state_.history[state_.history.size() - 1];
  const auto& prev = state_.history[state_.history.size() - 2];
  double max_change = 0.0;
  bool contiguous = true;
  for (int i = state_.frontier + 1; i <= last; ++i) {
    const double e = max_abs_diff(cur[i], prev[i]);
    max_change = std::max(max_change, e);
    if (contiguous && e < config_.epsilon) {
      state_.frontier = i;
    } else {
      contiguous = false;
    }
  }
  if (state_.frontier >= last || state_.k >= n) done_ = true;
  pending_.frontier = state_.frontier;
  pending_.max_change = max_change;
  return state_.frontier;
}

bool PintEngine::step() {
  fine_sweep();
  update_sweep();
  check_convergence();
  pending_.t_cumulative = seconds_since(start_);
  report_.per_iteration.push_back(pending_);
  log::debug("k=" + std::to_string(state_.k) + " frontier=" + std::to_string(state_.frontier) +
             " data=" + std::to_string(pending_.dataset_size) +
             " t=" + std::to_string(pending_.t_cumulative) + "s");
  return done_;
}

std::vector<State> PintEngine::serial_fine() const {
  std::vector<State> out{working_.initial_condition};
  for (int i = 1; i <= config_.n_intervals; ++i) out.push_back(fine(i, out.back()));
  return out;
}

std::vector<double> PintEngine::prediction_error_profile(const CorrectorSpec& corrector,
                                                         int* first_interval) {
  if (state_.k < 1) throw std::logic_error("prediction error profile needs a finished iteration");
  const int n = config_.n_intervals;
  const auto& prev_frontier =
      state_.k >= 2 ? report_.per_iteration[static_cast<std::size_t>(state_.k) - 2].frontier : 0;
  const int first = prev_frontier + 2;
  if (first_interval) *first_interval = first;
  const auto& u = state_.current();
  if (corrector.kind == CorrectorKind::gparareal && full_gp_.empty()) fit_full_gp();
  std::vector<double> err;
  for (int i = first; i <= n - 1; ++i) {
    const State truth_f = fine(i, u[i - 1]);
    const State truth_g = coarse(i, u[i - 1]);
    const State pred = correction(corrector, i, u[i - 1], 1, nullptr, nullptr);
    double e = 0.0;
    for (std::size_t s = 0; s < pred.size(); ++s) {
      e = std::max(e, std::abs(truth_f[s] - truth_g[s] - pred[s]));
    }
    err.push_back(e);
  }
  return err;
}

RunReport PintEngine::run() {
  report_ = RunReport{};
  const int n = config_.n_intervals;
  report_.n_intervals = n;
  report_.dim = config_.system.dim;
  report_.seed = config_.seed;
  auto& echo = report_.config_echo;
  echo.emplace_back("system.name", config_.system.name);
  for (const auto& [key, v] : config_.system.parameters) {
    echo.emplace_back("system.params." + key, fmt(v));
  }
  echo.emplace_back("system.t0", fmt(config_.system.t0));
  echo.emplace_back("system.t_end", fmt(config_.system.t_end));
  echo.emplace_back("pint.N", std::to_string(n));
  echo.emplace_back("pint.epsilon", fmt(config_.epsilon));
  echo.emplace_back("pint.frontier",
                    config_.frontier == FrontierRule::interior ? "interior" : "with_endpoint");
  echo.emplace_back("coarse", config_.coarse.describe());
  echo.emplace_back("fine", config_.fine.describe());
  echo.emplace_back("corrector", config_.corrector.describe());
  echo.emplace_back("gp.n_start", std::to_string(config_.fit.n_start));
  echo.emplace_back("gp.n_reg", std::to_string(config_.fit.nugget_grid.size()));
  echo.emplace_back("seed", std::to_string(config_.seed));

  try {
    coarse_init();
    while (!done_) {
      step();
      if (config_.budget_seconds && seconds_since(start_) > *config_.budget_seconds && !done_) {
        report_.status = RunStatus::budget_exhausted;
        report_.message = "wallclock budget exhausted after iteration " + std::to_string(state_.k);
        break;
      }
    }
  } catch (const SolverDivergence& e) {
    report_.status = RunStatus::diverged;
    report_.message = e.what();
  }
  report_.t_alg = initialized_ ? seconds_since(start_) : 0.0;
  report_.iterations = state_.k;
  report_.normalization_bounds = map_.bounds();
  if (state_.store) report_.dataset_size = state_.store->size();

  double sum = 0.0;
  for (double t : coarse_times_) sum += t;
  report_.t_g = coarse_times_.empty() ? 0.0 : sum / static_cast<double>(coarse_times_.size());
  sum = 0.0;
  for (double t : fine_times_) sum += t;
  report_.t_f = fine_times_.empty() ? 0.0 : sum / static_cast<double>(fine_times_.size());
  for (const auto& it : report_.per_iteration) report_.t_model += it.t_model;

  if (!state_.history.empty()) {
    const auto& u = state_.current();
    for (int i = 0; i <= n; ++i) {
      report_.times.push_back(time_at(i));
      const State& v = (i == n && state_.k > 0) ? state_.fine[n] : u[i];
      report_.trajectory.push_back(map_.denormalize(v));
    }
  }

  if (config_.measure_serial && report_.status != RunStatus::diverged && initialized_) {
    const auto t = Clock::now();
    (void)serial_fine();
    report_.t_serial_measured = seconds_since(t);
  }
  if (report_.iterations >= 1 && report_.t_f > 0.0) {
    report_.speedup = speedup(n, report_.iterations, report_.t_g, report_.t_f, report_.t_model);
    if (report_.t_alg > 0.0) {
      bool est = false;
      report_.speedup.s_empirical =
          empirical_speedup(n, report_.t_alg, report_.t_f, report_.t_serial_measured, &est);
      report_.speedup.serial_estimated = est;
    }
  }
  if (report_.status == RunStatus::converged && !done_) {
    report_.status = RunStatus::budget_exhausted;
  }
  return report_;
}

TrainingSet gather_training_set(const CorrectionStore& store, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  const std::size_t d = store.dim();
  TrainingSet t{Eigen::MatrixXd(indices.size(), d), Eigen::MatrixXd(indices.size(), d)};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& rec = store.record(indices[r]);
    for (std::size_t s = 0; s < d; ++s) {
      t.inputs(r, s) = rec.input[s];
      t.outputs(r, s) = rec.output[s];
    }
  }
  return t;
}

RunReport run_pint(const PintConfig& config) {
  PintEngine engine(config);
  return engine.run();
}

}  // namespace pintlab

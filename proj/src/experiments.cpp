#include "pintlab/experiments.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>

#include "pintlab/parallel.hpp"
#include "pintlab/report_io.hpp"

namespace pintlab {

namespace fs = std::filesystem;

namespace {

std::string seed_dir(std::uint64_t seed) { return "seed" + std::to_string(seed); }

std::string k_cell(const RunOutcome& o) {
  return o.converged() ? std::to_string(o.report.iterations) : std::string();
}

std::string status_of(const RunOutcome& o) {
  return o.error.empty() ? to_string(o.report.status) : "error";
}

std::string opt_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

template <typename Plan>
int run_command(const std::string& path, const CliOptions& opts, std::ostream& out,
                std::ostream& err, Plan plan,
                const std::function<void(const ExperimentConfig&, const std::vector<RunOutcome>&)>&
                    summarize) {
  ExperimentConfig cfg;
  std::vector<RunTask> tasks;
  try {
    cfg = load_experiment(path, {opts.seed, opts.output_dir});
    tasks = plan(cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << path << ": " << e.what() << '\n';
    return 1;
  }
  std::mutex io;
  std::vector<RunOutcome> outcomes;
  try {
    outcomes = execute(tasks, opts.jobs, true, [&](const RunOutcome& o) {
      std::lock_guard lock(io);
      out << std::left << std::setw(14) << o.task.group << ' ' << std::setw(32) << o.task.label
          << " seed=" << o.task.config.seed << "  ";
      if (!o.error.empty()) {
        out << "error: " << o.error << '\n';
      } else {
        out << "K=" << o.report.iterations << "  " << to_string(o.report.status)
            << "  T_alg=" << std::setprecision(4) << o.report.t_alg << "s\n";
      }
      out.flush();
    });
    summarize(cfg, outcomes);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  for (const auto& o : outcomes) {
    if (!o.converged()) return 2;
  }
  return 0;
}

void write_summary(const fs::path& path, const std::vector<RunOutcome>& outcomes) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "group,system,corrector,m,strategy,seed,K,status,T_alg,S_star,S_theoretical,S_empirical\n";
  for (const auto& o : outcomes) {
    const auto& c = o.task.config;
    f << o.task.group << ',' << c.system.name << ',' << to_string(c.corrector.kind) << ','
      << c.corrector.m << ',' << to_string(c.corrector.strategy) << ',' << c.seed << ','
      << k_cell(o) << ',' << status_of(o) << ',' << format_double(o.report.t_alg) << ','
      << format_double(o.report.speedup.s_star) << ',' << format_double(o.report.speedup.s_alg)
      << ',' << opt_double(o.report.speedup.s_empirical) << '\n';
  }
}

}  // namespace

std::string corrector_label(const CorrectorSpec& c) {
  switch (c.kind) {
    case CorrectorKind::mnn_uniform: return "mnn_m" + std::to_string(c.m);
    case CorrectorKind::nngparareal:
      return "nngparareal_m" + std::to_string(c.m) + "_" + to_string(c.strategy);
    default: return to_string(c.kind);
  }
}

std::vector<RunTask> plan_runs(const ExperimentConfig& cfg) {
  std::vector<RunTask> tasks;
  const fs::path root = cfg.output_dir;
  for (const auto& g : cfg.groups) {
    for (const auto& c : g.correctors) {
      for (std::uint64_t seed : g.seeds) {
        RunTask t;
        t.group = g.name;
        t.label = corrector_label(c);
        t.config = g.base;
        t.config.corrector = c;
        t.config.seed = seed;
        t.dir = root / g.name / t.label / seed_dir(seed);
        t.dataset_csv = g.dataset_csv;
        tasks.push_back(std::move(t));
      }
    }
  }
  if (tasks.empty()) throw ConfigError(cfg.source + ": no runs configured");
  return tasks;
}

std::vector<RunTask> plan_sweep_m(const ExperimentConfig& cfg) {
  std::vector<RunTask> tasks;
  const fs::path root = cfg.output_dir;
  for (const auto& g : cfg.groups) {
    if (g.sweep_m.empty()) {
      throw ConfigError(cfg.source + ": group [" + g.name + "] has no sweep.m list");
    }
    CorrectorSpec base{CorrectorKind::nngparareal, 15, SubsetStrategy::nearest};
    for (const auto& c : g.correctors) {
      if (c.kind == CorrectorKind::nngparareal) {
        base = c;
        break;
      }
    }
    for (std::size_t m : g.sweep_m) {
      for (std::uint64_t seed : g.seeds) {
        RunTask t;
        t.group = g.name;
        t.config = g.base;
        t.config.corrector = base;
        t.config.corrector.m = m;
        t.config.seed = seed;
        t.label = corrector_label(t.config.corrector);
        t.dir = root / g.name / "sweep_m" / t.label / seed_dir(seed);
        t.dataset_csv = g.dataset_csv;
        tasks.push_back(std::move(t));
      }
    }
  }
  if (tasks.empty()) throw ConfigError(cfg.source + ": no runs configured");
  return tasks;
}

std::vector<RunTask> plan_sweep_coarse(const ExperimentConfig& cfg) {
  std::vector<RunTask> tasks;
  const fs::path root = cfg.output_dir;
  for (const auto& g : cfg.groups) {
    if (g.sweep_coarse_steps_per_interval.empty()) {
      throw ConfigError(cfg.source + ": group [" + g.name + "] has no sweep.coarse_steps list");
    }
    for (long steps : g.sweep_coarse_steps_per_interval) {
      for (const auto& c : g.correctors) {
        for (std::uint64_t seed : g.seeds) {
          RunTask t;
          t.group = g.name;
          t.config = g.base;
          t.config.corrector = c;
          t.config.coarse.steps_per_interval = steps;
          t.config.seed = seed;
          t.label = corrector_label(c) + "_G" + std::to_string(steps);
          t.dir = root / g.name / "sweep_coarse" / t.label / seed_dir(seed);
          t.dataset_csv = g.dataset_csv;
          tasks.push_back(std::move(t));
        }
      }
    }
  }
  if (tasks.empty()) throw ConfigError(cfg.source + ": no runs configured");
  return tasks;
}

std::vector<RunOutcome> execute(const std::vector<RunTask>& tasks, unsigned jobs,
                                bool write_outputs,
                                const std::function<void(const RunOutcome&)>& on_done) {
  jobs = std::max(1u, jobs);
  const unsigned concurrent = static_cast<unsigned>(std::min<std::size_t>(jobs, tasks.size()));
  const unsigned per_run = std::max(1u, jobs / std::max(1u, concurrent));
  std::vector<RunOutcome> outcomes(tasks.size());
  parallel_for(tasks.size(), concurrent, [&](std::size_t i) {
    RunOutcome& o = outcomes[i];
    o.task = tasks[i];
    o.task.config.workers = per_run;
    try {
      PintEngine engine(o.task.config);
      o.report = engine.run();
      if (write_outputs) {
        write_run_outputs(o.task.dir, o.report, to_string(o.task.config.corrector.kind));
        if (o.task.dataset_csv && engine.state().store) {
          std::ofstream f(o.task.dir / "dataset.csv");
          engine.state().store->write_csv(f);
        }
      }
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    if (on_done) on_done(o);
  });
  return outcomes;
}

unsigned resolve_jobs(std::optional<unsigned> requested) {
  if (const char* env = std::getenv("PINT_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return requested.value_or(hardware_threads());
}

int cmd_run(const std::string& config_path, const CliOptions& opts, std::ostream& out,
            std::ostream& err) {
  return run_command(config_path, opts, out, err, plan_runs,
                     [](const ExperimentConfig& cfg, const std::vector<RunOutcome>& outcomes) {
                       const fs::path root = cfg.output_dir;
                       write_summary(root / "summary.csv", outcomes);
                       std::vector<SpeedupRow> rows;
                       for (const auto& o : outcomes) {
                         if (!o.error.empty()) continue;
                         rows.push_back(speedup_row(
                             o.task.group + "/" + o.task.label, o.report));
                       }
                       write_speedup_csv(root / "speedup.csv", rows, true);
                     });
}

int cmd_sweep_m(const std::string& config_path, const CliOptions& opts, std::ostream& out,
                std::ostream& err) {
  return run_command(
      config_path, opts, out, err, plan_sweep_m,
      [](const ExperimentConfig& cfg, const std::vector<RunOutcome>& outcomes) {
        const fs::path path = fs::path(cfg.output_dir) / "sweep_m.csv";
        fs::create_directories(path.parent_path());
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << "group,m,seed,K,status\n";
        for (const auto& o : outcomes) {
          f << o.task.group << ',' << o.task.config.corrector.m << ',' << o.task.config.seed
            << ',' << k_cell(o) << ',' << status_of(o) << '\n';
        }
      });
}

int cmd_sweep_coarse(const std::string& config_path, const CliOptions& opts, std::ostream& out,
                     std::ostream& err) {
  return run_command(
      config_path, opts, out, err, plan_sweep_coarse,
      [](const ExperimentConfig& cfg, const std::vector<RunOutcome>& outcomes) {
        const fs::path path = fs::path(cfg.output_dir) / "sweep_coarse.csv";
        fs::create_directories(path.parent_path());
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << "group,corrector,N,coarse_steps_per_interval,seed,K,status,T_G,T_F,T_model,"
             "S_star,S_theoretical,S_empirical\n";
        for (const auto& o : outcomes) {
          const auto& c = o.task.config;
          const bool ok = o.converged();
          f << o.task.group << ',' << corrector_label(c.corrector) << ',' << c.n_intervals << ','
            << c.coarse.steps_per_interval << ',' << c.seed << ',' << k_cell(o) << ','
            << status_of(o) << ',' << format_double(o.report.t_g) << ','
            << format_double(o.report.t_f) << ',' << format_double(o.report.t_model) << ','
            << (ok ? format_double(o.report.speedup.s_star) : "") << ','
            << (ok ? format_double(o.report.speedup.s_alg) : "") << ','
            << (ok ? opt_double(o.report.speedup.s_empirical) : "") << '\n';
        }
      });
}

int cmd_report(const std::string& config_path, const CliOptions& opts, std::ostream& out,
               std::ostream& err) {
  ExperimentConfig cfg;
  std::vector<RunTask> tasks;
  try {
    cfg = load_experiment(config_path, {opts.seed, opts.output_dir});
    tasks = plan_runs(cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  int found = 0;
  bool all_converged = true;
  out << std::left << std::setw(14) << "group" << std::setw(32) << "corrector" << std::setw(8)
      << "seed" << std::setw(6) << "K" << std::setw(18) << "status" << std::setw(10) << "S*"
      << std::setw(10) << "S_theory" << "S_emp\n";
  for (const auto& t : tasks) {
    const fs::path p = t.dir / "report.json";
    std::ifstream in(p);
    if (!in) {
      out << std::setw(14) << t.group << std::setw(32) << t.label << std::setw(8) << t.config.seed
          << "(no report at " << p.string() << ")\n";
      all_converged = false;
      continue;
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      err << "error: " << p.string() << ": " << e.what() << '\n';
      return 1;
    }
    ++found;
    const std::string status = j.value("status", "?");
    if (status != "converged") all_converged = false;
    const auto& sp = j["speedup"];
    std::ostringstream emp;
    if (!sp["S_empirical"].is_null()) emp << std::setprecision(4) << sp["S_empirical"].get<double>();
    out << std::setw(14) << t.group << std::setw(32) << t.label << std::setw(8) << t.config.seed
        << std::setw(6) << j.value("K", 0) << std::setw(18) << status << std::setw(10)
        << std::setprecision(4) << sp.value("S_star", 0.0) << std::setw(10)
        << sp.value("S_theoretical", 0.0) << emp.str() << '\n';
  }
  if (found == 0) {
    err << "error: no reports found under " << cfg.output_dir << '\n';
    return 1;
  }
  return all_converged ? 0 : 2;
}

}  // namespace pintlab

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pintlab/experiments.hpp"
#include "pintlab/log.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Parallel-in-time experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::string log_level = "warn";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config file")->required();
    sub->add_option("--jobs,-j", jobs, "worker threads (PINT_LAB_THREADS overrides)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "replace the configured seeds with this one");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--log", log_level, "debug|info|warn|error|off");
  };
  auto* run = app.add_subcommand("run", "run every configured (system, corrector, seed)");
  auto* sweep_m = app.add_subcommand("sweep-m", "nnGParareal over the sweep.m grid and seeds");
  auto* sweep_coarse =
      app.add_subcommand("sweep-coarse", "sweep coarse step counts per corrector");
  auto* report = app.add_subcommand("report", "summarize reports written by a previous run");
  for (auto* sub : {run, sweep_m, sweep_coarse, report}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    pintlab::log::set_level(pintlab::log::parse_level(log_level));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  pintlab::CliOptions opts;
  opts.jobs = pintlab::resolve_jobs(jobs);
  opts.seed = seed;
  opts.output_dir = out_dir;

  if (run->parsed()) return pintlab::cmd_run(config_path, opts, std::cout, std::cerr);
  if (sweep_m->parsed()) return pintlab::cmd_sweep_m(config_path, opts, std::cout, std::cerr);
  if (sweep_coarse->parsed()) {
    return pintlab::cmd_sweep_coarse(config_path, opts, std::cout, std::cerr);
  }
  return pintlab::cmd_report(config_path, opts, std::cout, std::cerr);
}

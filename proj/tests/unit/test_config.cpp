#include <sstream>

#include "doctest.h"
#include "pintlab/config.hpp"
#include "pintlab/experiments.hpp"

using namespace pintlab;

namespace {

ExperimentConfig parse(const std::string& text, ConfigOverrides o = {}) {
  std::istringstream in(text);
  return build_experiment(parse_config(in, "test.cfg"), o);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("global keys and sections") {
  const auto cfg = parse(R"(
# shared
pint.epsilon = 1e-6
coarse.order = 2
seeds = 1, 2, 3
output.dir = results

[fhn]
system.name = fhn
pint.N = 40
coarse.steps = 160
fine.steps = 160000
corrector.kinds = parareal, gparareal, nngparareal
corrector.m = 15

[lorenz]
system.name = lorenz
system.params.gamma2 = 30
pint.N = 50
coarse.order = 4
coarse.steps_per_interval = 6
fine.steps_per_interval = 450
corrector.kind = nngparareal
corrector.strategy = col_rnd, row_major
)");
  REQUIRE(cfg.groups.size() == 2);
  CHECK(cfg.output_dir == "results");
  const auto& f = cfg.groups[0];
  CHECK(f.name == "fhn");
  CHECK(f.base.n_intervals == 40);
  CHECK(f.base.coarse.order == 2);
  CHECK(f.base.coarse.steps_per_interval == 4);
  CHECK(f.base.fine.steps_per_interval == 4000);
  CHECK(f.base.epsilon == 1e-6);
  CHECK(f.correctors.size() == 3);
  CHECK(f.seeds == std::vector<std::uint64_t>{1, 2, 3});
  const auto& l = cfg.groups[1];
  CHECK(l.base.coarse.order == 4);
  CHECK(l.base.system.parameters.at("gamma2") == 30.0);
  REQUIRE(l.correctors.size() == 2);
  CHECK(l.correctors[0].strategy == SubsetStrategy::col_rnd);
  CHECK(l.correctors[1].strategy == SubsetStrategy::row_major);
  CHECK(plan_runs(cfg).size() == 3 * 3 + 2 * 3);
}

TEST_CASE("overrides replace seeds and output directory") {
  ConfigOverrides o;
  o.seed = 9;
  o.output_dir = "elsewhere";
  const auto cfg = parse("system.name = fhn\nseeds = 1, 2\n", o);
  CHECK(cfg.groups[0].seeds == std::vector<std::uint64_t>{9});
  CHECK(cfg.output_dir == "elsewhere");
}

TEST_CASE("sweep plans") {
  const auto cfg = parse(R"(
system.name = fhn
pint.N = 40
seeds = 0, 1
sweep.m = 10, 11, 12
sweep.coarse_steps = 80, 160
corrector.kinds = parareal, nngparareal
)");
  CHECK(plan_sweep_m(cfg).size() == 6);
  const auto sc = plan_sweep_coarse(cfg);
  CHECK(sc.size() == 2 * 2 * 2);
  CHECK(sc.front().config.coarse.steps_per_interval == 2);
}

TEST_CASE("errors name the source line and key") {
  CHECK(error_of("system.name = fhn\nbogus.key = 1\n").find("test.cfg:2: bogus.key") == 0);
  CHECK(error_of("system.name = fhn\npint.N = 7\ncoarse.steps = 160\n").find("divisible") !=
        std::string::npos);
  CHECK(error_of("system.name = fhn\nseeds =\n").find("seed list is empty") != std::string::npos);
  CHECK(error_of("system.name = fhn\npint.N = 1\n").find("pint.N") != std::string::npos);
  CHECK(error_of("pint.N = 4\n").find("missing system.name") != std::string::npos);
  CHECK(error_of("system.name = fhn\nsystem.name = lorenz\n").find("duplicate key") !=
        std::string::npos);
  CHECK(error_of("system.name = fhn\ncorrector.kind = magic\n").find("magic") !=
        std::string::npos);
  CHECK(error_of("system.name = fhn\npint.N = abc\n").find("expected a number") !=
        std::string::npos);
  CHECK(error_of("system.name = fhn\ncoarse.order = 3\n").find("coarse") != std::string::npos);
  CHECK(error_of("[a\n").find("malformed") != std::string::npos);
  CHECK(error_of("system.name = fhn_pde\n").find("must be set") != std::string::npos);
  CHECK(error_of("system.name = fhn\nsweep.m = 0\n").find("at least 1") != std::string::npos);
}

TEST_CASE("explicit normalization bounds") {
  const auto cfg = parse(R"(
system.name = fhn
normalization.mode = explicit
normalization.lo = -3, -2
normalization.hi = 3, 2
)");
  const auto& b = cfg.groups[0].base.bounds;
  REQUIRE(b.size() == 2);
  CHECK(b[1].lo == -2.0);
  CHECK(b[0].hi == 3.0);
  CHECK(error_of("system.name = fhn\nnormalization.lo = 1, 2\n").find("explicit") !=
        std::string::npos);
}

TEST_CASE("step division helper") {
  CHECK(steps_per_interval_from_total(160000, 40) == 4000);
  CHECK_THROWS_AS(steps_per_interval_from_total(250, 32), std::invalid_argument);
  CHECK_THROWS_AS(steps_per_interval_from_total(0, 32), std::invalid_argument);
}

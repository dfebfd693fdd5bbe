#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pintlab/engine.hpp"

namespace pintlab {

/// Parse or validation problem; the message starts with "source:line:" when a line
/// is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  int line = 0;
  std::vector<ConfigEntry> entries;
};

/// `key = value` lines with dotted keys, `#` comments and optional `[name]` section
/// headers. Keys before the first header are shared by all sections.
struct ConfigFile {
  std::string source;
  std::vector<ConfigEntry> globals;
  std::vector<ConfigSection> sections;
};

ConfigFile parse_config(std::istream& in, const std::string& source = "<config>");
ConfigFile load_config_file(const std::string& path);

/// One block of runs sharing a system and solver setup.
struct RunGroup {
  std::string name;
  PintConfig base;
  std::vector<CorrectorSpec> correctors;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> sweep_m;
  std::vector<long> sweep_coarse_steps_per_interval;
  bool dataset_csv = false;
};

struct ExperimentConfig {
  std::string source;
  std::string output_dir = "pint-lab-out";
  std::vector<RunGroup> groups;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

/// Interprets a parsed file. Throws ConfigError with line information.
ExperimentConfig build_experiment(const ConfigFile& file, const ConfigOverrides& overrides = {});

ExperimentConfig load_experiment(const std::string& path, const ConfigOverrides& overrides = {});

/// Total step count over the horizon converted to steps per interval; the total must
/// be a multiple of n_intervals.
long steps_per_interval_from_total(long total, int n_intervals);

}  // namespace pintlab

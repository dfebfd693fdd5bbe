#include "pintlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pintlab {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

class Reader {
 public:
  Reader(const ConfigFile& file, const ConfigSection* section) : source_(file.source) {
    for (const auto& e : file.globals) entries_[e.key] = e;
    if (section) {
      for (const auto& e : section->entries) entries_[e.key] = e;
      section_line_ = section->line;
    }
  }

  [[noreturn]] void fail(const ConfigEntry& e, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(e.line) + ": " + e.key + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(section_line_) + ": " + msg);
  }

  const ConfigEntry* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::optional<std::string> str(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    return e->value;
  }

  double parse_double(const ConfigEntry& e, const std::string& text) const {
    double v = 0.0;
    const char* b = text.data();
    const char* end = b + text.size();
    if (!text.empty() && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) {
      fail(e, "expected a number, got '" + text + "'");
    }
    return v;
  }

  long parse_integer(const ConfigEntry& e, const std::string& text) const {
    const double v = parse_double(e, text);
    if (v != std::floor(v) || std::abs(v) > 9e15) fail(e, "expected an integer, got '" + text + "'");
    return static_cast<long>(v);
  }

  std::optional<double> number(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    return parse_double(*e, e->value);
  }

  std::optional<long> integer(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    return parse_integer(*e, e->value);
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    fail(*e, "expected true or false");
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    for (const auto& t : split_list(e->value)) out.push_back(parse_double(*e, t));
    return out;
  }

  std::optional<std::vector<long>> integers(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    std::vector<long> out;
    for (const auto& t : split_list(e->value)) out.push_back(parse_integer(*e, t));
    return out;
  }

  std::optional<std::vector<std::string>> words(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    return split_list(e->value);
  }

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, e] : entries_) {
      if (k.rfind(prefix, 0) == 0) out.push_back(k);
    }
    return out;
  }

  void reject_unused() const {
    for (const auto& [k, e] : entries_) {
      if (!used_.contains(k)) fail(e, "unknown key");
    }
  }

  const ConfigEntry& entry(const std::string& key) const { return entries_.at(key); }

 private:
  std::string source_;
  int section_line_ = 0;
  std::map<std::string, ConfigEntry> entries_;
  std::set<std::string> used_;
};

SolverSpec read_solver(Reader& r, const std::string& prefix, int n_intervals,
                       SolverSpec fallback) {
  SolverSpec s = fallback;
  if (auto o = r.integer(prefix + ".order")) s.order = static_cast<int>(*o);
  const auto* total = r.find(prefix + ".steps");
  const auto* per = r.find(prefix + ".steps_per_interval");
  if (total && per) r.fail(*per, "give either steps or steps_per_interval, not both");
  try {
    if (total) {
      s.steps_per_interval =
          steps_per_interval_from_total(r.parse_integer(*total, total->value), n_intervals);
    }
  } catch (const std::invalid_argument& e) {
    r.fail(*total, e.what());
  }
  if (per) s.steps_per_interval = r.parse_integer(*per, per->value);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(prefix + ": " + e.what());
  }
  return s;
}

RunGroup build_group(const ConfigFile& file, const ConfigSection* section,
                     const ConfigOverrides& overrides, std::string& output_dir) {
  Reader r(file, section);
  RunGroup g;
  g.name = section ? section->name : "default";

  const auto name = r.str("system.name");
  if (!name) r.fail("missing system.name");
  ParameterMap params;
  const std::string param_prefix = "system.params.";
  for (const auto& key : r.keys_with_prefix(param_prefix)) {
    params[key.substr(param_prefix.size())] = *r.number(key);
  }
  std::uint64_t system_seed = 0;
  if (auto s = r.integer("system.seed")) system_seed = static_cast<std::uint64_t>(*s);

  PintConfig& c = g.base;
  try {
    c.system = make_system(*name, params, system_seed);
  } catch (const std::invalid_argument& e) {
    r.fail(r.entry("system.name"), e.what());
  }
  if (auto u0 = r.numbers("system.u0")) {
    if (u0->size() != c.system.dim) r.fail(r.entry("system.u0"), "wrong dimension");
    c.system.initial_condition = *u0;
  }
  if (auto t0 = r.number("system.t0")) c.system.t0 = *t0;
  if (auto tn = r.number("system.t_end")) c.system.t_end = *tn;
  try {
    c.system.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }

  if (auto n = r.integer("pint.N")) c.n_intervals = static_cast<int>(*n);
  if (c.n_intervals < 2) r.fail("pint.N must be at least 2");
  if (auto e = r.number("pint.epsilon")) c.epsilon = *e;
  if (auto f = r.str("pint.frontier")) {
    if (*f == "interior") {
      c.frontier = FrontierRule::interior;
    } else if (*f == "with_endpoint") {
      c.frontier = FrontierRule::with_endpoint;
    } else {
      r.fail(r.entry("pint.frontier"), "expected interior or with_endpoint");
    }
  }
  c.coarse = read_solver(r, "coarse", c.n_intervals, SolverSpec{1, 1});
  c.fine = read_solver(r, "fine", c.n_intervals, SolverSpec{4, 1});

  std::vector<std::string> kinds{"parareal"};
  const bool has_kind = r.find("corrector.kind") != nullptr;
  const bool has_kinds = r.find("corrector.kinds") != nullptr;
  if (has_kind && has_kinds) r.fail("give either corrector.kind or corrector.kinds");
  if (has_kind) kinds = {*r.str("corrector.kind")};
  if (has_kinds) kinds = *r.words("corrector.kinds");
  if (kinds.empty()) r.fail("corrector list is empty");
  std::size_t m = 15;
  if (auto mm = r.integer("corrector.m")) {
    if (*mm < 1) r.fail(r.entry("corrector.m"), "must be at least 1");
    m = static_cast<std::size_t>(*mm);
  }
  SubsetStrategy strategy = SubsetStrategy::nearest;
  std::vector<SubsetStrategy> strategies;
  if (auto s = r.words("corrector.strategy")) {
    try {
      for (const auto& w : *s) strategies.push_back(parse_subset_strategy(w));
    } catch (const std::invalid_argument& e) {
      r.fail(r.entry("corrector.strategy"), e.what());
    }
    if (strategies.empty()) r.fail(r.entry("corrector.strategy"), "empty strategy list");
    strategy = strategies.front();
  }
  for (const auto& k : kinds) {
    CorrectorSpec spec;
    try {
      spec.kind = parse_corrector_kind(k);
    } catch (const std::invalid_argument& e) {
      r.fail(e.what());
    }
    spec.m = m;
    spec.strategy = strategy;
    if (spec.kind == CorrectorKind::nngparareal && strategies.size() > 1) {
      for (auto st : strategies) {
        spec.strategy = st;
        g.correctors.push_back(spec);
      }
    } else {
      g.correctors.push_back(spec);
    }
  }

  if (auto v = r.integer("gp.n_start")) c.fit.n_start = static_cast<int>(*v);
  if (auto v = r.numbers("gp.nugget_grid")) c.fit.nugget_grid = *v;
  if (auto v = r.integer("gp.max_iter")) c.fit.max_iter = static_cast<int>(*v);
  if (auto v = r.number("gp.tol")) c.fit.f_tol = *v;
  if (auto v = r.number("gp.init_lo")) c.fit.init_lo = *v;
  if (auto v = r.number("gp.init_hi")) c.fit.init_hi = *v;
  try {
    c.fit.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }

  const auto* seed = r.find("seed");
  const auto* seeds = r.find("seeds");
  if (seed && seeds) r.fail("give either seed or seeds");
  if (seed) g.seeds = {static_cast<std::uint64_t>(r.parse_integer(*seed, seed->value))};
  if (seeds) {
    const auto list = r.integers("seeds");
    for (long s : *list) g.seeds.push_back(static_cast<std::uint64_t>(s));
    if (g.seeds.empty()) r.fail(*seeds, "seed list is empty");
  }
  if (!seed && !seeds) g.seeds = {0};
  if (overrides.seed) g.seeds = {*overrides.seed};

  if (auto mode = r.str("normalization.mode")) {
    if (*mode == "coarse") {
      c.normalization = NormalizationMode::from_coarse;
    } else if (*mode == "explicit") {
      c.normalization = NormalizationMode::explicit_bounds;
    } else if (*mode == "none") {
      c.normalization = NormalizationMode::none;
    } else {
      r.fail(r.entry("normalization.mode"), "expected coarse, explicit or none");
    }
  }
  if (auto m2 = r.number("normalization.margin")) c.normalization_margin = *m2;
  const auto lo = r.numbers("normalization.lo");
  const auto hi = r.numbers("normalization.hi");
  if (c.normalization == NormalizationMode::explicit_bounds) {
    if (!lo || !hi) r.fail("explicit normalization needs normalization.lo and normalization.hi");
    if (lo->size() != c.system.dim || hi->size() != c.system.dim) {
      r.fail("normalization bounds need one value per coordinate");
    }
    for (std::size_t j = 0; j < lo->size(); ++j) c.bounds.push_back({(*lo)[j], (*hi)[j]});
  } else if (lo || hi) {
    r.fail("normalization.lo/hi require normalization.mode = explicit");
  }

  if (auto b = r.number("budget.seconds")) c.budget_seconds = *b;
  if (auto v = r.boolean("report.measure_serial")) c.measure_serial = *v;
  if (auto v = r.boolean("report.gp_diagnostics")) c.gp_diagnostics = *v;
  if (auto v = r.boolean("report.dataset_csv")) g.dataset_csv = *v;

  if (auto ms = r.integers("sweep.m")) {
    for (long v : *ms) {
      if (v < 1) r.fail(r.entry("sweep.m"), "values must be at least 1");
      g.sweep_m.push_back(static_cast<std::size_t>(v));
    }
    if (g.sweep_m.empty()) r.fail(r.entry("sweep.m"), "empty list");
  }
  const auto* sc_total = r.find("sweep.coarse_steps");
  const auto* sc_per = r.find("sweep.coarse_steps_per_interval");
  if (sc_total && sc_per) r.fail("give either sweep.coarse_steps or sweep.coarse_steps_per_interval");
  if (sc_total) {
    const auto list = r.integers("sweep.coarse_steps");
    for (long v : *list) {
      try {
        g.sweep_coarse_steps_per_interval.push_back(
            steps_per_interval_from_total(v, c.n_intervals));
      } catch (const std::invalid_argument& e) {
        r.fail(*sc_total, e.what());
      }
    }
    if (g.sweep_coarse_steps_per_interval.empty()) r.fail(*sc_total, "empty list");
  }
  if (sc_per) {
    const auto list = r.integers("sweep.coarse_steps_per_interval");
    for (long v : *list) {
      if (v < 1) r.fail(*sc_per, "values must be at least 1");
      g.sweep_coarse_steps_per_interval.push_back(v);
    }
    if (g.sweep_coarse_steps_per_interval.empty()) r.fail(*sc_per, "empty list");
  }
  if (auto out = r.str("output.dir")) output_dir = *out;

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  r.reject_unused();
  return g;
}

}  // namespace

long steps_per_interval_from_total(long total, int n_intervals) {
  if (n_intervals < 1) throw std::invalid_argument("N must be positive");
  if (total < 1) throw std::invalid_argument("step count must be positive");
  if (total % n_intervals != 0) {
    throw std::invalid_argument("total step count " + std::to_string(total) +
                                " is not divisible by N = " + std::to_string(n_intervals));
  }
  return total / n_intervals;
}

ConfigFile parse_config(std::istream& in, const std::string& source) {
  ConfigFile file;
  file.source = source;
  std::string raw;
  int line_no = 0;
  std::set<std::string> section_names;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": malformed section header");
      }
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (!section_names.insert(name).second) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate section [" +
                          name + "]");
      }
      file.sections.push_back({name, line_no, {}});
      seen.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    ConfigEntry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (e.key.empty()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    }
    for (char ch : e.key) {
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_')) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": invalid key '" + e.key +
                          "'");
      }
    }
    if (!seen.insert(e.key).second) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + e.key +
                        "'");
    }
    if (file.sections.empty()) {
      file.globals.push_back(std::move(e));
    } else {
      file.sections.back().entries.push_back(std::move(e));
    }
  }
  return file;
}

ConfigFile load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  return parse_config(in, path);
}

ExperimentConfig build_experiment(const ConfigFile& file, const ConfigOverrides& overrides) {
  ExperimentConfig cfg;
  cfg.source = file.source;
  std::string out_dir;
  if (file.sections.empty()) {
    cfg.groups.push_back(build_group(file, nullptr, overrides, out_dir));
  } else {
    for (const auto& s : file.sections) {
      std::string dir;
      cfg.groups.push_back(build_group(file, &s, overrides, dir));
      if (!dir.empty() && out_dir.empty()) out_dir = dir;
    }
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path, const ConfigOverrides& overrides) {
  return build_experiment(load_config_file(path), overrides);
}

}  // namespace pintlab

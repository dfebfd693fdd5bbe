#include "pintlab/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pintlab {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

nlohmann::json hp_json(const GpHyperparams& hp) {
  return {{"sigma_i_sq", hp.sigma_i_sq}, {"sigma_o_sq", hp.sigma_o_sq},
          {"sigma_reg_sq", hp.sigma_reg_sq}};
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, p);
}

nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["status"] = to_string(r.status);
  if (!r.message.empty()) j["message"] = r.message;
  j["K"] = r.iterations;
  j["N"] = r.n_intervals;
  j["dim"] = r.dim;
  j["seed"] = r.seed;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : r.config_echo) cfg[k] = v;
  j["config"] = cfg;

  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : r.per_iteration) {
    iters.push_back({{"k", it.k},
                     {"L", it.frontier},
                     {"records_added", it.records_added},
                     {"dataset_size", it.dataset_size},
                     {"T_G", it.t_coarse},
                     {"T_F", it.t_fine},
                     {"T_model", it.t_model},
                     {"cumulative", it.t_cumulative},
                     {"max_change", it.max_change},
                     {"fallbacks", it.fallbacks}});
  }
  j["iterations"] = iters;

  nlohmann::json timing = {{"T_G_per_interval", r.t_g},
                           {"T_F_per_interval", r.t_f},
                           {"T_init", r.t_init},
                           {"T_model", r.t_model},
                           {"T_alg", r.t_alg}};
  timing["T_serial_measured"] =
      r.t_serial_measured ? nlohmann::json(*r.t_serial_measured) : nlohmann::json(nullptr);
  j["timing"] = timing;

  nlohmann::json sp = {{"S_star", r.speedup.s_star}, {"S_theoretical", r.speedup.s_alg}};
  sp["S_empirical"] =
      r.speedup.s_empirical ? nlohmann::json(*r.speedup.s_empirical) : nlohmann::json(nullptr);
  sp["serial_estimated"] = r.speedup.serial_estimated;
  j["speedup"] = sp;

  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& b : r.normalization_bounds) bounds.push_back({b.lo, b.hi});
  j["normalization_bounds"] = bounds;
  j["dataset_size"] = r.dataset_size;
  j["fallbacks"] = r.fallbacks;

  j["solution"] = {{"t", r.times}, {"u", r.trajectory}};

  if (!r.gp_diagnostics.empty()) {
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& d : r.gp_diagnostics) {
      diag.push_back({{"k", d.k},
                      {"interval", d.interval},
                      {"coordinate", d.coordinate},
                      {"n", d.n},
                      {"hyperparams", hp_json(d.hp)},
                      {"log_likelihood", d.log_likelihood},
                      {"evaluations", d.evaluations}});
    }
    j["gp_diagnostics"] = diag;
  }
  return j;
}

SpeedupRow speedup_row(const std::string& algorithm, const RunReport& report) {
  SpeedupRow row;
  row.algorithm = algorithm;
  row.n_intervals = report.n_intervals;
  row.s_star = report.speedup.s_star;
  row.s_theoretical = report.speedup.s_alg;
  row.s_empirical = report.speedup.s_empirical;
  return row;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_convergence_csv(const fs::path& path, const RunReport& report) {
  auto out = open_out(path);
  out << "k,L_k,T_G,T_F,T_model,cumulative\n";
  for (const auto& it : report.per_iteration) {
    out << it.k << ',' << it.frontier << ',' << format_double(it.t_coarse) << ','
        << format_double(it.t_fine) << ',' << format_double(it.t_model) << ','
        << format_double(it.t_cumulative) << '\n';
  }
}

void write_solution_csv(const fs::path& path, const RunReport& report) {
  auto out = open_out(path);
  out << 't';
  for (std::size_t j = 0; j < report.dim; ++j) out << ",u_" << j;
  out << '\n';
  for (std::size_t i = 0; i < report.trajectory.size(); ++i) {
    out << format_double(report.times[i]);
    for (double v : report.trajectory[i]) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_speedup_csv(const fs::path& path, const std::vector<SpeedupRow>& rows,
                       bool with_algorithm) {
  auto out = open_out(path);
  if (with_algorithm) out << "algorithm,";
  out << "N,S_star,S_theoretical,S_empirical\n";
  for (const auto& r : rows) {
    if (with_algorithm) out << r.algorithm << ',';
    out << r.n_intervals << ',' << format_double(r.s_star) << ','
        << format_double(r.s_theoretical) << ','
        << (r.s_empirical ? format_double(*r.s_empirical) : std::string()) << '\n';
  }
}

void write_run_outputs(const fs::path& dir, const RunReport& report, const std::string& algorithm) {
  fs::create_directories(dir);
  write_json(dir / "report.json", report_to_json(report));
  write_convergence_csv(dir / "convergence.csv", report);
  write_solution_csv(dir / "solution.csv", report);
  write_speedup_csv(dir / "speedup.csv", {speedup_row(algorithm, report)}, false);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw std::out_of_range("no CSV column '" + name + "'");
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    cells.push_back(cur);
    return cells;
  };
  if (!std::getline(in, line)) return t;
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      if (cell.empty()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        row.push_back(v);
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace pintlab

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pintlab/engine.hpp"
#include "pintlab/gp.hpp"
#include "pintlab/integrators.hpp"
#include "pintlab/perf_model.hpp"
#include "pintlab/systems.hpp"

namespace py = pybind11;
using namespace pintlab;

namespace {

py::dict report_to_dict(const RunReport& r) {
  py::dict d;
  d["status"] = to_string(r.status);
  d["message"] = r.message;
  d["iterations"] = r.iterations;
  d["n_intervals"] = r.n_intervals;
  d["seed"] = r.seed;
  d["times"] = r.times;
  d["trajectory"] = r.trajectory;
  d["t_g"] = r.t_g;
  d["t_f"] = r.t_f;
  d["t_model"] = r.t_model;
  d["t_alg"] = r.t_alg;
  d["s_alg"] = r.speedup.s_alg;
  d["s_star"] = r.speedup.s_star;
  d["s_empirical"] = r.speedup.s_empirical;
  d["dataset_size"] = r.dataset_size;
  d["fallbacks"] = r.fallbacks;
  py::list frontier;
  for (const auto& it : r.per_iteration) frontier.append(it.frontier);
  d["frontier"] = frontier;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parareal, m-nn Parareal, GParareal and nnGParareal solvers";

  m.def("ode_systems", &ode_system_names);

  m.def(
      "system_info",
      [](const std::string& name, const ParameterMap& params) {
        const auto s = make_ode_system(name, params);
        py::dict d;
        d["name"] = s.name;
        d["dim"] = s.dim;
        d["t0"] = s.t0;
        d["t_end"] = s.t_end;
        d["u0"] = s.initial_condition;
        d["parameters"] = s.parameters;
        return d;
      },
      py::arg("name"), py::arg("params") = ParameterMap{});

  m.def(
      "rhs",
      [](const std::string& name, double t, const State& u) {
        const auto s = make_ode_system(name);
        State du(u.size());
        s.rhs(t, u, du);
        return du;
      },
      py::arg("name"), py::arg("t"), py::arg("u"));

  m.def(
      "integrate",
      [](const std::string& name, int order, int steps, double t0, double t1, const State& u0) {
        const auto s = make_ode_system(name);
        return integrate_interval({order, steps}, s.rhs, u0, t0, t1);
      },
      py::arg("name"), py::arg("order"), py::arg("steps"), py::arg("t0"), py::arg("t1"),
      py::arg("u0"));

  m.def(
      "run",
      [](const std::string& system, int n_intervals, std::pair<int, int> coarse,
         std::pair<int, int> fine, const std::string& corrector, std::size_t m,
         const std::string& strategy, double epsilon, std::uint64_t seed,
         std::optional<double> t_end, unsigned workers, int n_start) {
        PintConfig c;
        c.system = make_ode_system(system);
        if (t_end) c.system.t_end = *t_end;
        c.n_intervals = n_intervals;
        c.coarse = {coarse.first, coarse.second};
        c.fine = {fine.first, fine.second};
        c.corrector.kind = parse_corrector_kind(corrector);
        c.corrector.m = m;
        c.corrector.strategy = parse_subset_strategy(strategy);
        c.epsilon = epsilon;
        c.seed = seed;
        c.workers = workers;
        c.fit.n_start = n_start;
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_pint(c);
        }
        return report_to_dict(r);
      },
      py::arg("system"), py::arg("n_intervals"), py::arg("coarse"), py::arg("fine"),
      py::arg("corrector") = "parareal", py::arg("m") = 15, py::arg("strategy") = "nearest",
      py::arg("epsilon") = 5e-7, py::arg("seed") = 0, py::arg("t_end") = py::none(),
      py::arg("workers") = 1, py::arg("n_start") = 10,
      "Solve a benchmark ODE system. coarse and fine are (order, steps per interval).");

  m.def(
      "serial_fine",
      [](const std::string& system, int n_intervals, std::pair<int, int> fine,
         std::optional<double> t_end) {
        const auto s0 = make_ode_system(system);
        const double te = t_end ? *t_end : s0.t_end;
        std::vector<State> out{s0.initial_condition};
        for (int i = 0; i < n_intervals; ++i) {
          const double a = s0.t0 + (te - s0.t0) * i / n_intervals;
          const double b = s0.t0 + (te - s0.t0) * (i + 1) / n_intervals;
          out.push_back(integrate_interval({fine.first, fine.second}, s0.rhs, out.back(), a, b));
        }
        return out;
      },
      py::arg("system"), py::arg("n_intervals"), py::arg("fine"), py::arg("t_end") = py::none());

  py::class_<GpHyperparams>(m, "GpHyperparams")
      .def(py::init<double, double, double>(), py::arg("sigma_i_sq"), py::arg("sigma_o_sq"),
           py::arg("sigma_reg_sq"))
      .def_readwrite("sigma_i_sq", &GpHyperparams::sigma_i_sq)
      .def_readwrite("sigma_o_sq", &GpHyperparams::sigma_o_sq)
      .def_readwrite("sigma_reg_sq", &GpHyperparams::sigma_reg_sq)
      .def("__repr__", [](const GpHyperparams& h) {
        return "GpHyperparams(" + std::to_string(h.sigma_i_sq) + ", " +
               std::to_string(h.sigma_o_sq) + ", " + std::to_string(h.sigma_reg_sq) + ")";
      });

  m.def(
      "log_marginal_likelihood",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyperparams& hp) {
        return log_marginal_likelihood(x, y, hp);
      },
      py::arg("inputs"), py::arg("outputs"), py::arg("hp"));

  m.def(
      "fit_hyperparams",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int n_start, std::uint64_t seed,
         std::optional<std::vector<double>> nugget_grid) {
        FitOptions o;
        o.n_start = n_start;
        if (nugget_grid) o.nugget_grid = *nugget_grid;
        const auto r = fit_hyperparams(x, y, o, seed);
        return std::make_pair(r.hp, r.log_likelihood);
      },
      py::arg("inputs"), py::arg("outputs"), py::arg("n_start") = 10, py::arg("seed") = 0,
      py::arg("nugget_grid") = py::none());

  py::class_<ScalarGp>(m, "ScalarGp")
      .def(py::init<Eigen::MatrixXd, const Eigen::VectorXd&, const GpHyperparams&>(),
           py::arg("inputs"), py::arg("outputs"), py::arg("hp"))
      .def("mean", [](const ScalarGp& g, const State& q) { return g.mean(q); })
      .def("variance", [](const ScalarGp& g, const State& q) { return g.variance(q); });

  m.def("theoretical_runtime", &theoretical_runtime, py::arg("n"), py::arg("k"), py::arg("t_g"),
        py::arg("t_f"), py::arg("t_model"));
  m.def(
      "speedup",
      [](int n, int k, double tg, double tf, double tm) {
        const auto s = speedup(n, k, tg, tf, tm);
        return std::make_pair(s.s_alg, s.s_star);
      },
      py::arg("n"), py::arg("k"), py::arg("t_g"), py::arg("t_f"), py::arg("t_model"));
}

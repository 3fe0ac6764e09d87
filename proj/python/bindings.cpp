#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wellopt/config.hpp"
#include "wellopt/errors.hpp"
#include "wellopt/mads.hpp"
#include "wellopt/strategies.hpp"

namespace py = pybind11;
using namespace wellopt;

namespace {

py::dict record_dict(const EvaluationRecord& r) {
  py::dict d;
  d["x"] = r.x;
  d["status"] = to_string(r.eval.status);
  d["npv"] = r.eval.npv;
  d["h"] = r.eval.h;
  d["feasible"] = r.eval.feasible;
  return d;
}

py::dict outcome_dict(const RunOutcome& o) {
  py::dict d;
  d["seed"] = o.seed;
  d["ok"] = o.ok;
  d["error"] = o.error;
  d["simulations"] = o.result.simulations;
  d["stop_reason"] = o.result.stop_reason;
  d["best"] = o.result.best ? py::object(record_dict(*o.result.best)) : py::object(py::none());
  d["stage1_best"] = o.stage1_best ? py::object(record_dict(*o.stage1_best)) : py::object(py::none());
  return d;
}

ExperimentConfig load(const std::string& path) { return load_config(path); }

py::dict validate(const std::string& path) {
  const auto cfg = load(path);
  const ReservoirProblem problem(cfg.problem);
  py::list vars;
  for (const auto& v : problem.variables()) {
    py::dict d;
    d["name"] = v.name;
    d["lower"] = v.lower;
    d["upper"] = v.upper;
    vars.append(d);
  }
  py::dict d;
  d["name"] = cfg.name;
  d["algorithm"] = std::string(to_string(cfg.algorithm.algorithm));
  d["dimension"] = problem.dimension();
  d["positional_dimension"] = problem.positional_dimension();
  d["budget"] = cfg.algorithm.budget;
  d["n_repeats"] = cfg.n_repeats;
  d["feasibility_tolerance"] = problem.feasibility_tolerance();
  d["variables"] = vars;
  return d;
}

py::dict evaluate(const std::string& path, const std::vector<double>& x) {
  const auto cfg = load(path);
  const ReservoirProblem problem(cfg.problem);
  if (x.size() != problem.dimension()) throw std::invalid_argument("x has the wrong dimension");
  Evaluation e;
  {
    py::gil_scoped_release release;
    if (auto why = problem.screen(x))
      e = Evaluation::rejected(*why);
    else
      e = problem.evaluate(x);
  }
  EvaluationRecord r;
  r.x = x;
  r.eval = e;
  auto d = record_dict(r);
  d["reason"] = e.reason;
  return d;
}

py::dict simulate_solution(const std::string& solution, const std::string& config) {
  const auto cfg = load(config);
  const ReservoirProblem problem(cfg.problem);
  std::ifstream in(solution);
  if (!in) throw std::invalid_argument("cannot open " + solution);
  const auto sol = solution_from_json(nlohmann::json::parse(in));
  Evaluation e;
  {
    py::gil_scoped_release release;
    e = problem.score(sol.candidate).eval;
  }
  py::dict d;
  d["status"] = to_string(e.status);
  d["npv"] = e.npv;
  d["h"] = e.h;
  d["feasible"] = e.feasible;
  d["recorded_npv"] = sol.npv ? py::object(py::float_(*sol.npv)) : py::object(py::none());
  return d;
}

py::dict run_config(const std::string& path, std::optional<std::string> algorithm,
                    std::optional<int> repeats, std::optional<std::uint64_t> seed,
                    std::optional<long> budget, int workers) {
  auto cfg = load(path);
  if (algorithm) cfg.algorithm.algorithm = parse_algorithm(*algorithm);
  if (repeats) cfg.n_repeats = *repeats;
  if (seed) cfg.base_seed = *seed;
  if (budget) {
    cfg.algorithm.budget = *budget;
    cfg.algorithm.stage1_budget.reset();
    cfg.algorithm.stage2_budget.reset();
  }
  const ReservoirProblem problem(cfg.problem);
  ExperimentResult res;
  {
    py::gil_scoped_release release;
    res = run_experiment(problem, cfg.algorithm, cfg.n_repeats, cfg.base_seed, workers, cfg.name);
  }
  py::dict summary;
  summary["algorithm"] = res.summary.algorithm;
  summary["case"] = res.summary.case_name;
  summary["runs"] = res.summary.runs;
  summary["failed"] = res.summary.failed;
  summary["infeasible"] = res.summary.infeasible;
  summary["best"] = res.summary.best;
  summary["worst"] = res.summary.worst;
  summary["mean"] = res.summary.mean;
  summary["stdev"] = res.summary.stdev;
  py::list runs;
  for (const auto& o : res.runs) runs.append(outcome_dict(o));
  py::dict d;
  d["summary"] = summary;
  d["runs"] = runs;
  return d;
}

// fn(x) returns either the objective or (objective, violation); maximized, feasible when the
// violation is <= tolerance
py::dict optimize(const py::function& fn, std::size_t dimension, const std::string& algorithm,
                  long budget, std::uint64_t seed, std::optional<std::size_t> lhs_points,
                  std::optional<std::size_t> swarm_size, double tolerance) {
  std::optional<py::error_already_set> raised;
  FunctionBox box(dimension, [&](std::span<const double> x) {
    if (raised) return Evaluation::failed("aborted");
    try {
      const py::object v = fn(std::vector<double>(x.begin(), x.end()));
      if (py::isinstance<py::tuple>(v)) {
        const auto t = v.cast<py::tuple>();
        return Evaluation::ok(t[0].cast<double>(), t[1].cast<double>(), tolerance);
      }
      return Evaluation::ok(v.cast<double>(), 0.0, tolerance);
    } catch (py::error_already_set& e) {
      raised = std::move(e);
      return Evaluation::failed("python error");
    }
  });
  AlgorithmSettings s;
  s.algorithm = parse_algorithm(algorithm);
  s.budget = budget;
  if (lhs_points) s.mads.lhs_points = *lhs_points;
  if (swarm_size) s.pso.size = *swarm_size;
  const auto o = run_algorithm(box, s, seed, 1);
  if (raised) throw *raised;
  return outcome_dict(o);
}

}  // namespace

PYBIND11_MODULE(_wellopt, m) {
  m.doc() = "Well placement and control optimization: MADS, PSO and their hybrids";

  // translators are tried newest first, so the derived type goes last
  py::register_exception<Error>(m, "WelloptError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("latin_hypercube", &latin_hypercube, py::arg("count"), py::arg("dimension"), py::arg("seed"));
  m.def("halton", &halton, py::arg("index"), py::arg("d"));
  m.def(
      "ortho_directions",
      [](double delta_p, std::size_t n, long halton_index) {
        auto mesh = MeshState::start(delta_p);
        mesh.halton_index = halton_index;
        return ortho_directions(mesh, n);
      },
      py::arg("delta_p"), py::arg("n"), py::arg("halton_index") = 1);
  m.def("validate", &validate, py::arg("config"));
  m.def("evaluate", &evaluate, py::arg("config"), py::arg("x"));
  m.def("simulate_solution", &simulate_solution, py::arg("solution"), py::arg("config"));
  m.def("run", &run_config, py::arg("config"), py::arg("algorithm") = py::none(),
        py::arg("repeats") = py::none(), py::arg("seed") = py::none(),
        py::arg("budget") = py::none(), py::arg("workers") = 1);
  m.def("optimize", &optimize, py::arg("fn"), py::arg("dimension"),
        py::arg("algorithm") = "mads-pso", py::arg("budget") = 1000, py::arg("seed") = 1,
        py::arg("lhs_points") = py::none(), py::arg("swarm_size") = py::none(),
        py::arg("tolerance") = 0.0);
}

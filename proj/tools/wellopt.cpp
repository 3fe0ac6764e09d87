// wellopt: joint well placement and control optimization from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wellopt/bruteforce.hpp"
#include "wellopt/config.hpp"
#include "wellopt/errors.hpp"
#include "wellopt/mads.hpp"
#include "wellopt/pso.hpp"
#include "wellopt/strategies.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wellopt;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("wellopt");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  const char* level = std::getenv("WELLOPT_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  return out;
}

void write_json(const fs::path& path, const json& doc) { open_out(path) << doc.dump(2) << '\n'; }

void dump_simulation(const ReservoirProblem& problem, const Candidate& candidate,
                     const fs::path& dir) {
  ProblemSpec spec = problem.spec();
  spec.simulator.keep_snapshots = true;
  const ReservoirProblem with_snapshots(spec);
  const auto scored = with_snapshots.score(candidate);
  if (!scored.simulation) {
    spdlog::warn("no simulation to dump: {}", scored.eval.reason);
    return;
  }
  auto rates = open_out(dir / "rates.csv");
  write_rates_csv(rates, *scored.simulation);
  auto perfs = open_out(dir / "perforations.csv");
  write_perforations_csv(perfs, complete_wells(candidate.wells, *spec.model, spec.r_well));
  // saturation snapshots: one float64 block of nx*ny*nz values per report step, i fastest
  std::ofstream sat(dir / "saturation.bin", std::ios::binary);
  for (const auto& snap : scored.simulation->saturation_snapshots)
    sat.write(reinterpret_cast<const char*>(snap.data()),
              static_cast<std::streamsize>(snap.size() * sizeof(double)));
}

int cmd_validate(const fs::path& config_path) {
  const auto cfg = load_config(config_path);
  const ReservoirProblem problem(cfg.problem);
  const auto& g = cfg.problem.model->grid;
  json report{{"status", "ok"},
              {"name", cfg.name},
              {"algorithm", std::string(to_string(cfg.algorithm.algorithm))},
              {"grid", {g.nx, g.ny, g.nz}},
              {"wells", cfg.problem.wells.size()},
              {"dimension", problem.dimension()},
              {"positional_dimension", problem.positional_dimension()},
              {"budget", cfg.algorithm.budget},
              {"n_repeats", cfg.n_repeats},
              {"feasibility_tolerance", problem.feasibility_tolerance()}};
  json vars = json::array();
  for (const auto& v : problem.variables())
    vars.push_back({{"name", v.name}, {"lower", v.lower}, {"upper", v.upper}});
  report["variables"] = std::move(vars);
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed, int workers,
            std::optional<fs::path> out_dir, std::optional<int> repeats,
            const std::optional<std::string>& algorithm, bool dump) {
  auto cfg = load_config(config_path);
  if (algorithm) cfg.algorithm.algorithm = parse_algorithm(*algorithm);
  if (seed) cfg.base_seed = *seed;
  if (repeats) cfg.n_repeats = *repeats;
  if (out_dir) cfg.output.dir = *out_dir;
  if (dump) cfg.output.dump_simulation = true;
  const ReservoirProblem problem(cfg.problem);
  fs::create_directories(cfg.output.dir);

  spdlog::info("{}: {} on {} variables, budget {}, {} run(s), {} worker(s)", cfg.name,
               to_string(cfg.algorithm.algorithm), problem.dimension(), cfg.algorithm.budget,
               cfg.n_repeats, workers);

  std::vector<RunOutcome> runs;
  for (int r = 0; r < cfg.n_repeats; ++r) {
    const auto run_seed = cfg.base_seed + static_cast<std::uint64_t>(r);
    auto outcome = run_algorithm(problem, cfg.algorithm, run_seed, workers);
    const fs::path dir = cfg.output.dir / fmt::format("run_{:03d}", r);
    fs::create_directories(dir);
    {
      auto conv = open_out(dir / "convergence.csv");
      write_convergence_csv(conv, outcome.result.history);
    }
    if (!outcome.result.mads_log.empty()) {
      auto log = open_out(dir / "mads_log.csv");
      write_mads_log_csv(log, outcome.result.mads_log);
    }
    if (!outcome.result.pso_log.empty()) {
      auto log = open_out(dir / "pso_log.csv");
      write_pso_log_csv(log, outcome.result.pso_log);
    }
    if (outcome.ok) {
      const auto& best = *outcome.result.best;
      write_json(dir / "best_solution.json",
                 solution_to_json(problem, best, to_string(cfg.algorithm.algorithm), run_seed));
      if (outcome.stage1_best)
        write_json(dir / "stage1_solution.json",
                   solution_to_json(problem, *outcome.stage1_best,
                                    to_string(cfg.algorithm.algorithm), run_seed));
      if (cfg.output.dump_simulation) dump_simulation(problem, problem.decode(best.x), dir);
      spdlog::info("run {} (seed {}): npv {:.6e}, h {:.3g}, {} simulations, stop: {}", r, run_seed,
                   best.eval.npv, best.eval.h, outcome.result.simulations,
                   outcome.result.stop_reason);
    } else {
      spdlog::error("run {} (seed {}) failed: {}", r, run_seed, outcome.error);
    }
    runs.push_back(std::move(outcome));
  }

  const auto summary = summarize(runs, std::string(to_string(cfg.algorithm.algorithm)), cfg.name);
  {
    auto out = open_out(cfg.output.dir / "summary.csv");
    write_summary_csv(out, std::span(&summary, 1));
  }
  {
    auto out = open_out(cfg.output.dir / "runs.csv");
    write_runs_csv(out, runs);
  }
  spdlog::info("mean npv {:.6e} over {} feasible run(s); results in {}", summary.mean,
               summary.runs - summary.failed - summary.infeasible, cfg.output.dir.string());
  return summary.failed == summary.runs ? kExitRuntime : 0;
}

int cmd_simulate(const fs::path& solution_path, const fs::path& config_path,
                 std::optional<fs::path> out_dir) {
  const auto cfg = load_config(config_path);
  const ReservoirProblem problem(cfg.problem);
  std::ifstream in(solution_path);
  if (!in) throw ConfigError("<solution>", fmt::format("cannot open {}", solution_path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<solution>", e.what());
  }
  const auto sol = solution_from_json(doc);
  const auto scored = problem.score(sol.candidate);
  if (!scored.eval.valid()) throw Error(fmt::format("solution did not simulate: {}", scored.eval.reason));

  json report{{"npv", scored.eval.npv}, {"h", scored.eval.h}, {"feasible", scored.eval.feasible}};
  if (sol.npv) {
    report["recorded_npv"] = *sol.npv;
    const double scale = std::max(std::abs(*sol.npv), 1.0);
    report["relative_difference"] = std::abs(scored.eval.npv - *sol.npv) / scale;
  }
  const fs::path dir = out_dir.value_or(solution_path.parent_path());
  fs::create_directories(dir);
  auto rates = open_out(dir / "rates.csv");
  write_rates_csv(rates, *scored.simulation);
  auto perfs = open_out(dir / "perforations.csv");
  write_perforations_csv(perfs, complete_wells(sol.candidate.wells, *cfg.problem.model,
                                               cfg.problem.r_well));
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_bruteforce(const fs::path& config_path, int workers, std::optional<fs::path> out_dir) {
  const auto cfg = load_config(config_path);
  if (!cfg.problem.fixed_controls)
    throw ConfigError("controls.fixed", "brute force needs fixed controls");
  const ReservoirProblem problem(cfg.problem);
  const auto result = enumerate_vertical_placements(problem, workers);
  const fs::path dir = out_dir.value_or(cfg.output.dir);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "bruteforce.csv");
    out << "index,placement,status,npv,h,feasible\n";
    for (const auto& r : result.records) {
      const auto c = problem.decode(r.x);
      std::string placement;
      for (const auto& w : c.wells) {
        const auto& v = std::get<VerticalWell>(w.shape);
        placement += fmt::format("{}{}:{}:{}", placement.empty() ? "" : " ", w.label, v.x_idx, v.y_idx);
      }
      out << fmt::format("{},{},{},{:.17g},{:.17g},{}\n", r.index, placement,
                         to_string(r.eval.status), r.eval.npv, r.eval.h, int(r.eval.feasible));
    }
  }
  json report{{"placements", result.placements}, {"simulated", result.records.size()}};
  if (result.best) {
    write_json(dir / "best_solution.json", solution_to_json(problem, *result.best, "bruteforce", 0));
    report["best_npv"] = result.best->eval.npv;
    report["best_h"] = result.best->eval.h;
  }
  std::cout << report.dump(2) << '\n';
  return result.best ? 0 : kExitRuntime;
}

void report_error(const char* kind, const std::string& message, const std::string& path = {}) {
  json err{{"error", kind}, {"message", message}};
  if (!path.empty()) err["path"] = path;
  std::cerr << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Joint well placement and control optimization (MADS, PSO, hybrids)"};
  app.require_subcommand(1);

  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  fs::path config_path, solution_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats;
  std::optional<fs::path> out_dir;
  std::optional<std::string> algorithm;
  int workers = hw;
  bool dump = false;

  auto* run = app.add_subcommand("run", "Run the configured experiment. Latin hypercube start "
                                        "points count against the evaluation budget.");
  run->add_option("config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Base seed (run r uses seed + r)");
  run->add_option("--workers", workers, "Parallel simulations")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--repeats", repeats, "Number of independent runs")->check(CLI::PositiveNumber);
  run->add_option("--algorithm", algorithm, "Override algorithm.name")
      ->check(CLI::IsMember({"mads", "pso", "mads-pso", "sequential-1", "sequential-2"}));
  run->add_flag("--dump", dump, "Write rate series and saturation snapshots of best solutions");

  auto* validate = app.add_subcommand("validate", "Check an experiment JSON");
  validate->add_option("config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);

  auto* simulate = app.add_subcommand("simulate", "Re-simulate a solution JSON and write rates");
  simulate->add_option("solution", solution_path, "Solution JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_dir, "Output directory (default: next to the solution)");

  auto* brute = app.add_subcommand("bruteforce", "Enumerate every vertical-well placement");
  brute->add_option("config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  brute->add_option("--workers", workers, "Parallel simulations")->check(CLI::PositiveNumber);
  brute->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, seed, workers, out_dir, repeats, algorithm, dump);
    if (*validate) return cmd_validate(config_path);
    if (*simulate) return cmd_simulate(solution_path, config_path, out_dir);
    if (*brute) return cmd_bruteforce(config_path, workers, out_dir);
  } catch (const ConfigError& e) {
    report_error("config", e.what(), e.path());
    return kExitConfig;
  } catch (const std::exception& e) {
    report_error("runtime", e.what());
    return kExitRuntime;
  }
  return 0;
}

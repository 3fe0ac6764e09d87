#include "wellopt/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "wellopt/errors.hpp"

namespace wellopt {

RunResult hybrid_mads_pso_run(Evaluator& evaluator, std::uint64_t seed,
                              const HybridOptions& options, std::stop_token stop) {
  const auto design = initial_design(evaluator, options.pso.size, seed, stop);
  const std::size_t k = std::min(options.pso.size, design.size());
  const std::span<const EvaluationRecord> last(design.data() + (design.size() - k), k);
  std::vector<Point> positions;
  for (const auto& r : last) positions.push_back(r.x);
  while (positions.size() < std::max<std::size_t>(options.pso.size, 2))
    positions.push_back(positions.back());
  auto swarm = SwarmState::from_positions(positions, options.pso, seed ^ 0x5DEECE66Dull);
  swarm.absorb(last);

  BarrierState barrier;
  barrier.update(design);
  swarm.global_best = *barrier.primary();
  auto mesh = MeshState::start(options.mads.initial_poll);

  RunResult result;
  auto finish = [&](std::string why) {
    result.stop_reason = std::move(why);
    result.best = *barrier.primary();
    result.history = evaluator.history();
    result.simulations = evaluator.used();
    return result;
  };

  for (;;) {
    if (mesh.delta_p < options.mads.delta_min) return finish("mesh");
    if (evaluator.remaining() <= 0) return finish("budget");
    if (stop.stop_requested()) return finish("stopped");
    if (options.mads.max_iterations >= 0 && mesh.k >= options.mads.max_iterations)
      return finish("iterations");

    velocity_position_update(swarm);
    const Point& anchor = barrier.primary()->x;
    for (auto& p : swarm.particles) p.x = project_to_mesh(p.x, anchor, mesh.delta_m);
    const auto search = swarm.positions();

    StepOutcome step;
    try {
      step = mads_step(evaluator, mesh, barrier, search);
    } catch (const BudgetExhausted&) {
      return finish("budget");
    }
    swarm.absorb(step.search);
    swarm.global_best = *barrier.primary();
    const auto* p = barrier.primary();
    result.mads_log.push_back({mesh.k, mesh.delta_m, mesh.delta_p, p->eval.npv, p->eval.h,
                               barrier.h_max, step.success, step.search_success,
                               evaluator.used()});
    result.pso_log.push_back({mesh.k, p->eval.npv, p->eval.h, mean_speed(swarm), evaluator.used()});
  }
}

SequentialResult sequential_run(const StagedProblem& problem, std::uint64_t seed,
                                const SequentialOptions& options, int workers,
                                std::stop_token stop) {
  if (options.stage1_budget < 0 || options.stage2_budget < 0)
    throw Error("stage budgets must be >= 0");
  SequentialResult out;
  RunResult& run = out.run;

  Evaluator first(problem.reduced, options.stage1_budget, workers);
  first.set_stage("stage1");
  std::optional<EvaluationRecord> stage1_best;
  if (options.stage1_budget > 0) {
    try {
      auto r1 = pso_run(first, seed, options.pso, stop);
      stage1_best = std::move(r1.best);
      run.pso_log = std::move(r1.pso_log);
    } catch (const NoValidPointFound&) {
    }
  }
  out.stage1_simulations = first.used();
  for (auto r : first.history()) {
    r.x = problem.lift(r.x);
    run.history.push_back(std::move(r));
  }
  if (stage1_best) {
    stage1_best->x = problem.lift(stage1_best->x);
    out.stage1_best = stage1_best;
  }

  const long carry = options.stage2_budget > 0 ? options.stage1_budget - first.used() : 0;
  const long budget2 = options.stage2_budget + carry;
  if (budget2 <= 0) {
    if (!stage1_best) throw NoValidPointFound("stage 1 found no valid point and stage 2 is empty");
    run.best = stage1_best;
    run.stop_reason = "stage1";
    run.simulations = first.used();
    return out;
  }

  Evaluator second(problem.full, budget2, workers);
  second.set_stage("stage2");
  RunResult stage2 = stage1_best
                         ? mads_run_from(second, stage1_best->x, seed, options.mads, stop)
                         : mads_run(second, seed, options.mads, stop);

  const long offset = first.used();
  const long index_offset = static_cast<long>(run.history.size());
  for (auto r : second.history()) {
    r.simulations += offset;
    r.index += index_offset;
    run.history.push_back(std::move(r));
  }
  run.mads_log = std::move(stage2.mads_log);
  for (auto& m : run.mads_log) m.simulations += offset;
  run.best = stage2.best;
  if (run.best) {
    run.best->simulations += offset;
    run.best->index += index_offset;
  }
  run.stop_reason = stage2.stop_reason;
  run.simulations = offset + second.used();
  return out;
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Mads: return "mads";
    case Algorithm::Pso: return "pso";
    case Algorithm::Hybrid: return "mads-pso";
    case Algorithm::SequentialI: return "sequential-1";
    case Algorithm::SequentialII: return "sequential-2";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "mads") return Algorithm::Mads;
  if (name == "pso") return Algorithm::Pso;
  if (name == "mads-pso" || name == "hybrid") return Algorithm::Hybrid;
  if (name == "sequential-1" || name == "seq1") return Algorithm::SequentialI;
  if (name == "sequential-2" || name == "seq2") return Algorithm::SequentialII;
  throw Error(fmt::format("unknown algorithm '{}'", name));
}

std::pair<long, long> stage_budgets(const ReservoirProblem& problem, const AlgorithmSettings& s) {
  if (s.stage1_budget && s.stage2_budget) return {*s.stage1_budget, *s.stage2_budget};
  const auto& wells = problem.spec().wells;
  const bool all_vertical = std::all_of(wells.begin(), wells.end(), [](const WellTemplate& w) {
    return w.kind == ShapeKind::Vertical;
  });
  // one third of the budget to placement for two-parameter wells, 40% for the others
  const double share = all_vertical ? 1.0 / 3.0 : 0.4;
  if (s.stage1_budget) return {*s.stage1_budget, s.budget - *s.stage1_budget};
  if (s.stage2_budget) return {s.budget - *s.stage2_budget, *s.stage2_budget};
  const long b1 = std::lround(share * static_cast<double>(s.budget));
  return {b1, s.budget - b1};
}

FixedControls stage1_controls(const ReservoirProblem& problem, const AlgorithmSettings& s) {
  const auto& spec = problem.spec();
  if (s.algorithm == Algorithm::SequentialI)
    return {spec.injector_bhp.upper, spec.producer_bhp.lower};
  return s.seq2_controls;
}

namespace {

RunOutcome guarded(std::uint64_t seed, const std::function<void(RunOutcome&)>& body) {
  RunOutcome out;
  out.seed = seed;
  try {
    body(out);
    out.ok = out.result.best.has_value();
    if (!out.ok) out.error = "no incumbent";
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

}  // namespace

RunOutcome run_algorithm(const BlackBox& box, const AlgorithmSettings& s, std::uint64_t seed,
                         int workers, std::stop_token stop) {
  return guarded(seed, [&](RunOutcome& out) {
    Evaluator ev(box, s.budget, workers);
    ev.set_stage(std::string(to_string(s.algorithm)));
    switch (s.algorithm) {
      case Algorithm::Mads: out.result = mads_run(ev, seed, s.mads, stop); break;
      case Algorithm::Pso: out.result = pso_run(ev, seed, s.pso, stop); break;
      case Algorithm::Hybrid: out.result = hybrid_mads_pso_run(ev, seed, {s.pso, s.mads}, stop); break;
      default: throw Error("sequential strategies need a reservoir problem");
    }
  });
}

RunOutcome run_algorithm(const ReservoirProblem& problem, const AlgorithmSettings& s,
                         std::uint64_t seed, int workers, std::stop_token stop) {
  if (s.algorithm != Algorithm::SequentialI && s.algorithm != Algorithm::SequentialII)
    return run_algorithm(static_cast<const BlackBox&>(problem), s, seed, workers, stop);
  return guarded(seed, [&](RunOutcome& out) {
    const auto controls = stage1_controls(problem, s);
    const auto [b1, b2] = stage_budgets(problem, s);
    if (b1 + b2 > s.budget) throw Error("stage budgets exceed the total budget");
    const ReservoirProblem reduced = problem.with_fixed_controls(controls);
    StagedProblem staged{problem, reduced,
                         [&](std::span<const double> x) { return problem.lift(x, controls); }};
    SequentialOptions opts;
    opts.stage1_budget = b1;
    opts.stage2_budget = b2;
    opts.pso = s.pso;
    opts.mads = s.mads;
    opts.mads.initial_poll = s.stage2_initial_poll;
    auto res = sequential_run(staged, seed, opts, workers, stop);
    out.result = std::move(res.run);
    out.stage1_best = std::move(res.stage1_best);
  });
}

ExperimentSummary summarize(std::span<const RunOutcome> runs, std::string algorithm,
                            std::string case_name) {
  ExperimentSummary s;
  s.algorithm = std::move(algorithm);
  s.case_name = std::move(case_name);
  s.runs = static_cast<int>(runs.size());
  std::vector<double> values;
  for (const auto& r : runs) {
    if (!r.ok) {
      ++s.failed;
    } else if (!r.result.best->eval.feasible) {
      ++s.infeasible;
    } else {
      values.push_back(r.result.best->eval.npv);
    }
  }
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.best = s.worst = s.mean = s.stdev = nan;
    return s;
  }
  s.best = *std::max_element(values.begin(), values.end());
  s.worst = *std::min_element(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() == 1) {
    s.single_run = true;
    s.stdev = 0.0;
  } else {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

ExperimentResult run_experiment(const ReservoirProblem& problem, const AlgorithmSettings& settings,
                                int n_repeats, std::uint64_t base_seed, int workers,
                                const std::string& case_name, std::stop_token stop) {
  if (n_repeats < 1) throw Error("n_repeats must be >= 1");
  ExperimentResult out;
  for (int r = 0; r < n_repeats; ++r)
    out.runs.push_back(run_algorithm(problem, settings, base_seed + static_cast<std::uint64_t>(r),
                                     workers, stop));
  out.summary = summarize(out.runs, std::string(to_string(settings.algorithm)), case_name);
  return out;
}

namespace {

std::string num(double v) { return std::isnan(v) ? std::string{} : fmt::format("{:.17g}", v); }

}  // namespace

void write_summary_csv(std::ostream& out, std::span<const ExperimentSummary> rows) {
  out << "algorithm,case,runs,failed,infeasible,best,worst,mean,stdev,single_run\n";
  for (const auto& s : rows)
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", s.algorithm, s.case_name, s.runs,
                       s.failed, s.infeasible, num(s.best), num(s.worst), num(s.mean),
                       num(s.stdev), int(s.single_run));
}

void write_runs_csv(std::ostream& out, std::span<const RunOutcome> runs) {
  out << "run,seed,status,npv,h,feasible,simulations,stop_reason,error\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const auto* b = r.result.best ? &*r.result.best : nullptr;
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", i, r.seed, r.ok ? "ok" : "failed",
                       b ? num(b->eval.npv) : "", b ? num(b->eval.h) : "",
                       b ? int(b->eval.feasible) : 0, r.result.simulations, r.result.stop_reason,
                       error);
  }
}

void write_convergence_csv(std::ostream& out, std::span<const EvaluationRecord> history) {
  out << "simulations,best_npv\n";
  const auto series = convergence_series(history);
  for (std::size_t i = 0; i < series.size(); ++i) out << fmt::format("{},{}\n", i + 1, num(series[i]));
}

}  // namespace wellopt

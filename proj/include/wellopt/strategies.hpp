#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "wellopt/core.hpp"
#include "wellopt/mads.hpp"
#include "wellopt/problem.hpp"
#include "wellopt/pso.hpp"
#include "wellopt/search.hpp"

namespace wellopt {

struct HybridOptions {
  PsoOptions pso;
  MadsOptions mads;
};

/// MADS whose search step is one update of a persistent swarm. Particle positions are
/// snapped onto the current mesh around the incumbent before evaluation; the swarm's global
/// best follows the MADS primary incumbent after every iteration.
RunResult hybrid_mads_pso_run(Evaluator& evaluator, std::uint64_t seed,
                              const HybridOptions& options = {}, std::stop_token stop = {});

/// A full search space together with a restriction of it (controls pinned) and the map from
/// the restricted space back to the full one.
struct StagedProblem {
  const BlackBox& full;
  const BlackBox& reduced;
  std::function<Point(std::span<const double>)> lift;
};

struct SequentialOptions {
  long stage1_budget = 4000;
  long stage2_budget = 8000;
  PsoOptions pso;
  MadsOptions mads{.initial_poll = 0.1};
};

struct SequentialResult {
  RunResult run;  // history in full-space coordinates, stage tags "stage1" / "stage2"
  std::optional<EvaluationRecord> stage1_best;  // lifted to the full space
  long stage1_simulations = 0;
};

/// PSO on the restricted problem, then MADS on the full problem starting from the lifted
/// stage-1 best. Unused stage-1 budget carries over to stage 2 unless stage 2 is disabled
/// with a zero budget.
SequentialResult sequential_run(const StagedProblem& problem, std::uint64_t seed,
                                const SequentialOptions& options, int workers = 1,
                                std::stop_token stop = {});

enum class Algorithm { Mads, Pso, Hybrid, SequentialI, SequentialII };

std::string_view to_string(Algorithm a);
/// Accepts "mads", "pso", "mads-pso", "sequential-1", "sequential-2" (and "seq1", "seq2").
Algorithm parse_algorithm(std::string_view name);

struct AlgorithmSettings {
  Algorithm algorithm = Algorithm::Hybrid;
  long budget = 12000;
  MadsOptions mads;
  PsoOptions pso;
  std::optional<long> stage1_budget;  // sequential; default depends on the well shape
  std::optional<long> stage2_budget;
  double stage2_initial_poll = 0.1;
  FixedControls seq2_controls{425.0, 150.0};
};

/// Stage budgets actually used for a sequential run.
std::pair<long, long> stage_budgets(const ReservoirProblem& problem, const AlgorithmSettings& s);

/// Controls pinned in stage 1: the role bounds for Sequential-I, the configured values for
/// Sequential-II.
FixedControls stage1_controls(const ReservoirProblem& problem, const AlgorithmSettings& s);

struct RunOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunResult result;
  std::optional<EvaluationRecord> stage1_best;
};

RunOutcome run_algorithm(const ReservoirProblem& problem, const AlgorithmSettings& settings,
                         std::uint64_t seed, int workers = 1, std::stop_token stop = {});

/// Same for an arbitrary black box; sequential strategies are not available here.
RunOutcome run_algorithm(const BlackBox& box, const AlgorithmSettings& settings,
                         std::uint64_t seed, int workers = 1, std::stop_token stop = {});

struct ExperimentSummary {
  std::string algorithm;
  std::string case_name;
  int runs = 0;
  int failed = 0;      // runs that raised an error
  int infeasible = 0;  // runs whose best point violates the rate limits
  double best = 0.0, worst = 0.0, mean = 0.0, stdev = 0.0;
  bool single_run = false;
};

/// Statistics over the final npv of successful, feasible runs. Sample standard deviation;
/// zero with `single_run` set when only one run counts.
ExperimentSummary summarize(std::span<const RunOutcome> runs, std::string algorithm,
                            std::string case_name);

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  ExperimentSummary summary;
};

/// n_repeats independent runs with seeds base_seed, base_seed + 1, ...
ExperimentResult run_experiment(const ReservoirProblem& problem, const AlgorithmSettings& settings,
                                int n_repeats, std::uint64_t base_seed, int workers = 1,
                                const std::string& case_name = "",
                                std::stop_token stop = {});

void write_summary_csv(std::ostream& out, std::span<const ExperimentSummary> rows);
void write_runs_csv(std::ostream& out, std::span<const RunOutcome> runs);
/// simulations,best_npv per fresh simulation (empty npv before the first feasible point).
void write_convergence_csv(std::ostream& out, std::span<const EvaluationRecord> history);

}  // namespace wellopt

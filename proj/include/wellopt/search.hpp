#pragma once

#include <cstdint>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "wellopt/core.hpp"

namespace wellopt {

/// One row of the MADS iteration log.
struct MadsIteration {
  long k = 0;
  double delta_m = 0.0;
  double delta_p = 0.0;
  double npv = 0.0;  // primary incumbent after the step
  double h = 0.0;
  double h_max = 0.0;
  bool success = false;
  bool search_success = false;
  long simulations = 0;
};

/// One row of the PSO iteration log.
struct PsoIteration {
  long iteration = 0;
  double best_npv = 0.0;
  double best_h = 0.0;
  double mean_speed = 0.0;  // mean velocity norm over the swarm
  long simulations = 0;
};

/// Outcome of one optimizer run. `best` is the feasible incumbent if any feasible point was
/// seen, otherwise the least-infeasible one.
struct RunResult {
  std::optional<EvaluationRecord> best;
  std::vector<EvaluationRecord> history;
  std::vector<MadsIteration> mads_log;
  std::vector<PsoIteration> pso_log;
  std::string stop_reason;
  long simulations = 0;
};

/// Keeps the best record under `better`; earlier records win ties.
inline bool offer(std::optional<EvaluationRecord>& best, const EvaluationRecord& r) {
  if (!r.eval.valid()) return false;
  if (best && !better(r.eval, best->eval)) return false;
  best = r;
  return true;
}

/// Latin hypercube batches until at least one valid point appears. Each retry draws a fresh
/// design from a derived seed. Throws NoValidPointFound if the budget runs out first.
std::vector<EvaluationRecord> initial_design(Evaluator& evaluator, std::size_t count,
                                             std::uint64_t seed,
                                             std::stop_token stop = {});

}  // namespace wellopt

#pragma once

#include <optional>
#include <vector>

#include "wellopt/evaluation.hpp"
#include "wellopt/problem.hpp"

namespace wellopt {

struct BruteForceResult {
  std::vector<EvaluationRecord> records;  // every simulated placement, enumeration order
  std::optional<EvaluationRecord> best;
  long placements = 0;  // distinct-cell placements enumerated
};

/// Simulate every assignment of distinct cells to the wells of an all-vertical problem with
/// fixed controls. Throws if the problem has other well shapes, free controls, or more than
/// `max_placements` candidates.
BruteForceResult enumerate_vertical_placements(const ReservoirProblem& problem, int workers = 1,
                                               long max_placements = 2'000'000);

}  // namespace wellopt

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stop_token>
#include <vector>

#include "wellopt/core.hpp"
#include "wellopt/search.hpp"

namespace wellopt {

/// Mesh and poll sizes in normalized coordinates.
struct MeshState {
  double delta_m = 0.0625;
  double delta_p = 0.25;
  long k = 0;
  long halton_index = 1;

  static MeshState start(double delta_p);
  void expand();    // delta_p * 4, capped at 1
  void contract();  // delta_p / 4
};

using Direction = std::vector<std::int64_t>;

/// Component d of the Halton point with the given index, base = d-th prime.
double halton(long index, std::size_t d);

/// 2N mesh directions: the columns of [H, -H] with H = |q|^2 I - 2 q q^T built from the
/// integer-rounded Halton direction q, |q| <= sqrt(delta_p / delta_m).
std::vector<Direction> ortho_directions(const MeshState& mesh, std::size_t n);

/// Move `point` to the nearest lattice point around `anchor` that lies inside [0, 1]^N.
Point project_to_mesh(std::span<const double> point, std::span<const double> anchor,
                      double delta_m);

/// x + delta_m d for every direction, each coordinate step clipped so the point stays both on
/// the mesh and inside the unit box.
std::vector<Point> poll_points(std::span<const double> incumbent, const MeshState& mesh,
                               std::span<const Direction> directions);

enum class BarrierMove {
  Failure,    // nothing better: shrink the mesh
  Improving,  // only the infeasible side moved toward feasibility: keep the mesh
  Success,    // better primary incumbent: grow the mesh
};

/// Progressive barrier. `filter` holds the infeasible points not dominated in (h, npv); the
/// infeasible incumbent is the best-npv filter point with h <= h_max, and h_max shrinks to the
/// largest filter h below the previous incumbent's whenever a batch lowers the violation.
struct BarrierState {
  double h_max = std::numeric_limits<double>::infinity();
  std::optional<EvaluationRecord> feasible;
  std::optional<EvaluationRecord> infeasible;
  std::vector<EvaluationRecord> filter;

  /// Feasible incumbent if present, else the infeasible one.
  const EvaluationRecord* primary() const;
  /// Absorb a batch. Success means a better feasible point, or, while none exists, an
  /// infeasible incumbent that dominates the previous one.
  BarrierMove update(std::span<const EvaluationRecord> records);
};

struct MadsOptions {
  double initial_poll = 0.25;
  double delta_min = 1.0e-6;
  std::size_t lhs_points = 60;
  long max_iterations = -1;  // negative: unlimited
};

struct StepOutcome {
  bool success = false;
  bool improving = false;
  bool search_success = false;
  std::vector<EvaluationRecord> search;
  std::vector<EvaluationRecord> poll;
};

/// One search-then-poll iteration. Search points are projected onto the mesh first; the poll
/// runs only if the search does not improve the primary incumbent, and covers the infeasible
/// incumbent too when both incumbents exist. Updates the mesh.
/// Propagates BudgetExhausted.
StepOutcome mads_step(Evaluator& evaluator, MeshState& mesh, BarrierState& barrier,
                      std::span<const Point> search = {});

/// Latin hypercube start, then mads_step until the budget runs out, delta_p < delta_min,
/// the iteration cap or a stop request.
RunResult mads_run(Evaluator& evaluator, std::uint64_t seed, const MadsOptions& options = {},
                   std::stop_token stop = {});

/// Same, but starting from the single point `start`. Falls back to a seeded Latin hypercube
/// if `start` turns out invalid.
RunResult mads_run_from(Evaluator& evaluator, const Point& start, std::uint64_t seed,
                        const MadsOptions& options, std::stop_token stop = {});

void write_mads_log_csv(std::ostream& out, std::span<const MadsIteration> log);

}  // namespace wellopt

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stop_token>
#include <vector>

#include "wellopt/core.hpp"
#include "wellopt/search.hpp"

namespace wellopt {

struct PsoOptions {
  std::size_t size = 50;
  double iota = 0.721;  // inertia
  double mu = 1.193;    // cognitive
  double nu = 1.193;    // social
  int stagnation = 100; // iterations without a new global best before stopping
  long max_iterations = -1;
};

struct Particle {
  Point x;
  Point v;
  std::optional<EvaluationRecord> best;
};

struct SwarmState {
  std::vector<Particle> particles;
  std::optional<EvaluationRecord> global_best;
  double iota = 0.721, mu = 1.193, nu = 1.193;
  Rng rng{0};

  static SwarmState from_positions(std::span<const Point> positions, const PsoOptions& options,
                                   std::uint64_t seed);

  /// Record each particle's evaluation (records[i] belongs to particle i) and refresh the
  /// personal and global bests. Returns true if the global best record changed.
  bool absorb(std::span<const EvaluationRecord> records);
  std::vector<Point> positions() const;
};

/// v <- iota v + mu r1 (p - x) + nu r2 (g - x); x <- x + v; clamped coordinates get their
/// velocity negated and halved. A missing p or g drops its term.
void velocity_position_update(Particle& particle, const Point* global_best, double iota,
                              double mu, double nu, std::span<const double> r1,
                              std::span<const double> r2);

/// Draws fresh r1, r2 per particle and coordinate from the swarm's generator.
void velocity_position_update(SwarmState& swarm);

/// The better record under the constrained ranking; `a` on ties.
inline const EvaluationRecord& rank(const EvaluationRecord& a, const EvaluationRecord& b) {
  return better(b.eval, a.eval) ? b : a;
}

/// Latin hypercube swarm with zero velocities, synchronous global-best updates, stopping on
/// budget, stagnation, the iteration cap or a stop request.
RunResult pso_run(Evaluator& evaluator, std::uint64_t seed, const PsoOptions& options = {},
                  std::stop_token stop = {});

double mean_speed(const SwarmState& swarm);

void write_pso_log_csv(std::ostream& out, std::span<const PsoIteration> log);

}  // namespace wellopt

#include "wellopt/pso.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "wellopt/errors.hpp"

namespace wellopt {

SwarmState SwarmState::from_positions(std::span<const Point> positions, const PsoOptions& options,
                                      std::uint64_t seed) {
  if (positions.size() < 2) throw Error("swarm needs at least two particles");
  SwarmState s;
  s.iota = options.iota;
  s.mu = options.mu;
  s.nu = options.nu;
  s.rng = Rng(seed);
  for (const auto& p : positions) s.particles.push_back({p, Point(p.size(), 0.0), std::nullopt});
  return s;
}

bool SwarmState::absorb(std::span<const EvaluationRecord> records) {
  bool changed = false;
  const std::size_t n = std::min(records.size(), particles.size());
  for (std::size_t i = 0; i < n; ++i) {
    offer(particles[i].best, records[i]);
    if (offer(global_best, records[i])) changed = true;
  }
  return changed;
}

std::vector<Point> SwarmState::positions() const {
  std::vector<Point> out;
  out.reserve(particles.size());
  for (const auto& p : particles) out.push_back(p.x);
  return out;
}

void velocity_position_update(Particle& particle, const Point* global_best, double iota,
                              double mu, double nu, std::span<const double> r1,
                              std::span<const double> r2) {
  auto& x = particle.x;
  auto& v = particle.v;
  const Point* personal = particle.best ? &particle.best->x : nullptr;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double vi = iota * v[i];
    if (personal) vi += mu * r1[i] * ((*personal)[i] - x[i]);
    if (global_best) vi += nu * r2[i] * ((*global_best)[i] - x[i]);
    double xi = x[i] + vi;
    if (xi < 0.0 || xi > 1.0) {
      xi = std::clamp(xi, 0.0, 1.0);
      vi = -0.5 * vi;
    }
    x[i] = xi;
    v[i] = vi;
  }
}

void velocity_position_update(SwarmState& swarm) {
  const Point* g = swarm.global_best ? &swarm.global_best->x : nullptr;
  Point r1, r2;
  for (auto& p : swarm.particles) {
    r1.resize(p.x.size());
    r2.resize(p.x.size());
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      r1[i] = swarm.rng.uniform();
      r2[i] = swarm.rng.uniform();
    }
    velocity_position_update(p, g, swarm.iota, swarm.mu, swarm.nu, r1, r2);
  }
}

double mean_speed(const SwarmState& swarm) {
  double total = 0.0;
  for (const auto& p : swarm.particles) {
    double s = 0.0;
    for (double v : p.v) s += v * v;
    total += std::sqrt(s);
  }
  return swarm.particles.empty() ? 0.0 : total / static_cast<double>(swarm.particles.size());
}

RunResult pso_run(Evaluator& evaluator, std::uint64_t seed, const PsoOptions& options,
                  std::stop_token stop) {
  const auto design = initial_design(evaluator, options.size, seed, stop);
  // retries before the last batch were all invalid, so only the last one seeds the swarm
  const std::size_t k = std::min(options.size, design.size());
  const std::span<const EvaluationRecord> last(design.data() + (design.size() - k), k);
  std::vector<Point> positions;
  for (const auto& r : last) positions.push_back(r.x);
  while (positions.size() < std::max<std::size_t>(options.size, 2)) positions.push_back(positions.back());
  auto swarm = SwarmState::from_positions(positions, options, seed ^ 0x5DEECE66Dull);
  swarm.absorb(last);

  RunResult result;
  auto log = [&](long it) {
    result.pso_log.push_back({it, swarm.global_best->eval.npv, swarm.global_best->eval.h,
                              mean_speed(swarm), evaluator.used()});
  };
  auto finish = [&](std::string why) {
    result.stop_reason = std::move(why);
    result.best = swarm.global_best;
    result.history = evaluator.history();
    result.simulations = evaluator.used();
    return result;
  };
  log(0);

  int stale = 0;
  for (long it = 1;; ++it) {
    if (evaluator.remaining() <= 0) return finish("budget");
    if (stop.stop_requested()) return finish("stopped");
    if (options.max_iterations >= 0 && it > options.max_iterations) return finish("iterations");
    velocity_position_update(swarm);
    const auto recs = evaluator.evaluate_batch(swarm.positions());
    stale = swarm.absorb(recs) ? 0 : stale + 1;
    log(it);
    if (stale >= options.stagnation) return finish("stagnation");
  }
}

void write_pso_log_csv(std::ostream& out, std::span<const PsoIteration> log) {
  out << "iteration,best_npv,best_h,mean_speed,simulations\n";
  for (const auto& r : log)
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{}\n", r.iteration, r.best_npv, r.best_h,
                       r.mean_speed, r.simulations);
}

}  // namespace wellopt

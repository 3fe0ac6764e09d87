#include "wellopt/mads.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include <fmt/format.h>

#include "wellopt/errors.hpp"

namespace wellopt {

MeshState MeshState::start(double delta_p) {
  if (!(delta_p > 0.0 && delta_p <= 1.0)) throw Error("initial poll size must lie in (0, 1]");
  MeshState m;
  m.delta_p = delta_p;
  m.delta_m = std::min(delta_p, delta_p * delta_p);
  return m;
}

void MeshState::expand() {
  delta_p = std::min(1.0, 4.0 * delta_p);
  delta_m = std::min(delta_p, delta_p * delta_p);
}

void MeshState::contract() {
  delta_p /= 4.0;
  delta_m = std::min(delta_p, delta_p * delta_p);
}

namespace {

const std::vector<long>& primes(std::size_t count) {
  static thread_local std::vector<long> table{2};
  for (long c = table.back() + 1; table.size() < count; ++c) {
    bool prime = true;
    for (long p : table) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) table.push_back(c);
  }
  return table;
}

double round_norm(std::span<const double> c, double alpha) {
  double s = 0.0;
  for (double v : c) {
    const double q = std::round(alpha * v);
    s += q * q;
  }
  return std::sqrt(s);
}

}  // namespace

double halton(long index, std::size_t d) {
  const long base = primes(d + 1)[d];
  double f = 1.0, r = 0.0;
  for (long i = index; i > 0; i /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
  }
  return r;
}

std::vector<Direction> ortho_directions(const MeshState& mesh, std::size_t n) {
  if (n == 0) throw Error("ortho_directions needs N >= 1");
  std::vector<double> c(n);
  double norm = 0.0;
  for (std::size_t d = 0; d < n; ++d) {
    c[d] = 2.0 * halton(mesh.halton_index, d) - 1.0;
    norm += c[d] * c[d];
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    c.assign(n, 0.0);
    c[0] = 1.0;
  } else {
    for (auto& v : c) v /= norm;
  }

  // largest alpha whose rounded direction still fits in the poll radius; the rounded norm
  // is nondecreasing in alpha so bisection is safe
  const double bound = std::sqrt(mesh.delta_p / mesh.delta_m) * (1.0 + 1e-12);
  double lo = 0.0, hi = (bound + 1.0) * std::sqrt(static_cast<double>(n));
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (round_norm(c, mid) <= bound ? lo : hi) = mid;
  }
  Direction q(n);
  std::int64_t q2 = 0;
  for (std::size_t d = 0; d < n; ++d) {
    q[d] = static_cast<std::int64_t>(std::llround(lo * c[d]));
    q2 += q[d] * q[d];
  }
  if (q2 == 0) {
    const auto big = static_cast<std::size_t>(
        std::max_element(c.begin(), c.end(),
                         [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        c.begin());
    q[big] = c[big] < 0 ? -1 : 1;
    q2 = 1;
  }

  std::vector<Direction> dirs(2 * n, Direction(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t h = (i == j ? q2 : 0) - 2 * q[i] * q[j];
      dirs[j][i] = h;
      dirs[n + j][i] = -h;
    }
  return dirs;
}

namespace {

double lattice_step(double x, double wanted, double delta_m) {
  const double lo = std::ceil(-x / delta_m);
  const double hi = std::floor((1.0 - x) / delta_m);
  return std::clamp(wanted, std::min(lo, 0.0), std::max(hi, 0.0));
}

}  // namespace

Point project_to_mesh(std::span<const double> point, std::span<const double> anchor,
                      double delta_m) {
  if (point.size() != anchor.size()) throw Error("project_to_mesh: dimension mismatch");
  Point y(point.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double s = lattice_step(anchor[i], std::round((point[i] - anchor[i]) / delta_m), delta_m);
    y[i] = std::clamp(anchor[i] + s * delta_m, 0.0, 1.0);
  }
  return y;
}

std::vector<Point> poll_points(std::span<const double> incumbent, const MeshState& mesh,
                               std::span<const Direction> directions) {
  std::vector<Point> out;
  out.reserve(directions.size());
  for (const auto& d : directions) {
    if (d.size() != incumbent.size()) throw Error("poll_points: dimension mismatch");
    Point y(incumbent.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double s = lattice_step(incumbent[i], static_cast<double>(d[i]), mesh.delta_m);
      y[i] = std::clamp(incumbent[i] + s * mesh.delta_m, 0.0, 1.0);
    }
    out.push_back(std::move(y));
  }
  return out;
}

const EvaluationRecord* BarrierState::primary() const {
  if (feasible) return &*feasible;
  if (infeasible) return &*infeasible;
  return nullptr;
}

namespace {

bool dominates(const Evaluation& a, const Evaluation& b) { return a.h <= b.h && a.npv >= b.npv; }

}  // namespace

BarrierMove BarrierState::update(std::span<const EvaluationRecord> records) {
  const bool had_feasible = feasible.has_value();
  bool feasible_improved = false;
  for (const auto& r : records) {
    if (!r.eval.valid() || !r.eval.feasible) continue;
    if (!feasible || r.eval.npv > feasible->eval.npv) {
      feasible = r;
      feasible_improved = true;
    }
  }

  const double previous_h = infeasible ? infeasible->eval.h : std::numeric_limits<double>::infinity();
  bool lowered = false;
  for (const auto& r : records) {
    if (!r.eval.valid() || r.eval.feasible) continue;
    if (r.eval.h < previous_h) lowered = true;
    if (std::any_of(filter.begin(), filter.end(),
                    [&](const auto& f) { return dominates(f.eval, r.eval); }))
      continue;
    std::erase_if(filter, [&](const auto& f) { return dominates(r.eval, f.eval); });
    filter.push_back(r);
  }
  if (lowered) {
    double widest = -1.0;
    for (const auto& f : filter)
      if (f.eval.h < previous_h) widest = std::max(widest, f.eval.h);
    h_max = std::min(h_max, widest);
  }

  std::optional<EvaluationRecord> before = std::move(infeasible);
  infeasible.reset();
  for (const auto& f : filter) {
    if (f.eval.h > h_max) continue;
    if (!infeasible || f.eval.npv > infeasible->eval.npv ||
        (f.eval.npv == infeasible->eval.npv && f.eval.h < infeasible->eval.h))
      infeasible = f;
  }
  const bool infeasible_improved =
      infeasible && (!before || (infeasible->x != before->x && dominates(infeasible->eval, before->eval)));

  if (feasible_improved || (!had_feasible && infeasible_improved)) return BarrierMove::Success;
  return lowered ? BarrierMove::Improving : BarrierMove::Failure;
}

StepOutcome mads_step(Evaluator& evaluator, MeshState& mesh, BarrierState& barrier,
                      std::span<const Point> search) {
  const EvaluationRecord* incumbent = barrier.primary();
  if (!incumbent) throw Error("mads_step needs an incumbent");
  const Point x = incumbent->x;
  StepOutcome out;

  if (!search.empty()) {
    std::vector<Point> projected;
    projected.reserve(search.size());
    for (const auto& p : search) projected.push_back(project_to_mesh(p, x, mesh.delta_m));
    out.search = evaluator.evaluate_batch(projected);
    const auto move = barrier.update(out.search);
    out.search_success = move == BarrierMove::Success;
    out.success = out.search_success;
    out.improving = move == BarrierMove::Improving;
  }
  if (!out.success) {
    const auto dirs = ortho_directions(mesh, x.size());
    auto polls = poll_points(x, mesh, dirs);
    if (barrier.feasible && barrier.infeasible) {
      auto secondary = poll_points(barrier.infeasible->x, mesh, dirs);
      polls.insert(polls.end(), std::make_move_iterator(secondary.begin()),
                   std::make_move_iterator(secondary.end()));
    }
    out.poll = evaluator.evaluate_batch(polls);
    const auto move = barrier.update(out.poll);
    out.success = move == BarrierMove::Success;
    out.improving = out.improving || move == BarrierMove::Improving;
  }

  if (out.success)
    mesh.expand();
  else if (!out.improving)
    mesh.contract();
  assert(mesh.delta_m <= mesh.delta_p);
  ++mesh.k;
  ++mesh.halton_index;
  return out;
}

namespace {

RunResult mads_loop(Evaluator& evaluator, MeshState mesh, BarrierState barrier,
                    const MadsOptions& options, std::stop_token stop) {
  RunResult result;
  auto finish = [&](std::string why) {
    result.stop_reason = std::move(why);
    if (const auto* p = barrier.primary()) result.best = *p;
    result.history = evaluator.history();
    result.simulations = evaluator.used();
    return result;
  };
  for (;;) {
    if (mesh.delta_p < options.delta_min) return finish("mesh");
    if (evaluator.remaining() <= 0) return finish("budget");
    if (stop.stop_requested()) return finish("stopped");
    if (options.max_iterations >= 0 && mesh.k >= options.max_iterations) return finish("iterations");
    StepOutcome step;
    try {
      step = mads_step(evaluator, mesh, barrier);
    } catch (const BudgetExhausted&) {
      return finish("budget");
    }
    const auto* p = barrier.primary();
    result.mads_log.push_back({mesh.k, mesh.delta_m, mesh.delta_p, p->eval.npv, p->eval.h,
                               barrier.h_max, step.success, step.search_success,
                               evaluator.used()});
  }
}

}  // namespace

std::vector<EvaluationRecord> initial_design(Evaluator& evaluator, std::size_t count,
                                             std::uint64_t seed, std::stop_token stop) {
  std::vector<EvaluationRecord> all;
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (evaluator.remaining() <= 0 || stop.stop_requested())
      throw NoValidPointFound("no valid point found before the budget ran out");
    // golden-ratio stride keeps retry seeds well separated
    const auto pts = latin_hypercube(count, evaluator.dimension(),
                                     seed + attempt * 0x9E3779B97F4A7C15ull);
    auto recs = evaluator.evaluate_batch(pts);
    const bool any_valid =
        std::any_of(recs.begin(), recs.end(), [](const auto& r) { return r.eval.valid(); });
    all.insert(all.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    if (any_valid) return all;
  }
}

RunResult mads_run(Evaluator& evaluator, std::uint64_t seed, const MadsOptions& options,
                   std::stop_token stop) {
  BarrierState barrier;
  barrier.update(initial_design(evaluator, options.lhs_points, seed, stop));
  return mads_loop(evaluator, MeshState::start(options.initial_poll), std::move(barrier), options,
                   stop);
}

RunResult mads_run_from(Evaluator& evaluator, const Point& start, std::uint64_t seed,
                        const MadsOptions& options, std::stop_token stop) {
  if (evaluator.remaining() <= 0) throw NoValidPointFound("no budget for the starting point");
  BarrierState barrier;
  const Point one[] = {start};
  barrier.update(evaluator.evaluate_batch(one));
  if (!barrier.primary()) barrier.update(initial_design(evaluator, options.lhs_points, seed, stop));
  return mads_loop(evaluator, MeshState::start(options.initial_poll), std::move(barrier), options,
                   stop);
}

void write_mads_log_csv(std::ostream& out, std::span<const MadsIteration> log) {
  out << "k,delta_m,delta_p,npv,h,h_max,success,search_success,simulations\n";
  for (const auto& r : log)
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{}\n", r.k, r.delta_m,
                       r.delta_p, r.npv, r.h, r.h_max, int(r.success), int(r.search_success),
                       r.simulations);
}

}  // namespace wellopt

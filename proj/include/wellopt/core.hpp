#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wellopt/evaluation.hpp"

namespace wellopt {

using Point = std::vector<double>;

/// Objective over the normalized box [0, 1]^N. `evaluate` must be safe to call concurrently.
class BlackBox {
 public:
  virtual ~BlackBox() = default;
  virtual std::size_t dimension() const = 0;
  /// Cheap check run before dispatch. A returned reason rejects the point without spending
  /// budget.
  virtual std::optional<std::string> screen(std::span<const double> /*x*/) const {
    return std::nullopt;
  }
  virtual Evaluation evaluate(std::span<const double> x) const = 0;
};

/// BlackBox over a plain callable; handy for analytic test problems.
class FunctionBox final : public BlackBox {
 public:
  using Fn = std::function<Evaluation(std::span<const double>)>;
  FunctionBox(std::size_t dimension, Fn fn) : dimension_(dimension), fn_(std::move(fn)) {}
  std::size_t dimension() const override { return dimension_; }
  Evaluation evaluate(std::span<const double> x) const override { return fn_(x); }

 private:
  std::size_t dimension_;
  Fn fn_;
};

/// Thin deterministic wrapper around mt19937_64 with explicitly defined draws, so sequences
/// do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// One sample per stratum [i/count, (i+1)/count) on every axis, jittered uniformly.
std::vector<Point> latin_hypercube(std::size_t count, std::size_t dimension, std::uint64_t seed);

void clamp_unit(std::span<double> x);

/// Batch evaluation with exact-match caching, budget accounting and order-preserving parallel
/// dispatch. This is the only place where optimizer work runs concurrently.
class Evaluator {
 public:
  Evaluator(const BlackBox& box, long budget, int workers = 1);

  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  /// Records come back in input order. Points are clamped to [0, 1]^N first. Repeated
  /// vectors reuse the cached evaluation for free; fresh simulations are counted against the
  /// budget and the batch is cut at the first point that would overrun it. Throws
  /// BudgetExhausted when no budget remains at call time.
  std::vector<EvaluationRecord> evaluate_batch(std::span<const Point> points);

  const BlackBox& box() const { return box_; }
  std::size_t dimension() const { return box_.dimension(); }
  long budget() const { return budget_; }
  long used() const { return used_; }
  long remaining() const { return budget_ - used_; }
  int workers() const { return workers_; }

  void set_stage(std::string stage) { stage_ = std::move(stage); }
  const std::vector<EvaluationRecord>& history() const { return history_; }

 private:
  const BlackBox& box_;
  long budget_;
  int workers_;
  long used_ = 0;
  long next_index_ = 0;
  std::string stage_;
  std::map<Point, Evaluation> cache_;
  std::mutex cache_mutex_;
  std::vector<EvaluationRecord> history_;
};

/// Best-so-far feasible objective after each fresh simulation; NaN before the first feasible
/// point. Entry s corresponds to s + 1 simulations.
std::vector<double> convergence_series(std::span<const EvaluationRecord> history);

}  // namespace wellopt

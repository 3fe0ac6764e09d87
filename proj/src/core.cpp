#include "wellopt/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "wellopt/errors.hpp"

namespace wellopt {

std::uint64_t Rng::below(std::uint64_t n) {
  // rejection sampling keeps the draw unbiased
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

std::vector<Point> latin_hypercube(std::size_t count, std::size_t dimension, std::uint64_t seed) {
  if (count == 0) throw Error("latin_hypercube needs count >= 1");
  Rng rng(seed);
  std::vector<Point> pts(count, Point(dimension));
  std::vector<std::size_t> strata(count);
  for (std::size_t d = 0; d < dimension; ++d) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    for (std::size_t i = count; i > 1; --i) std::swap(strata[i - 1], strata[rng.below(i)]);
    for (std::size_t i = 0; i < count; ++i) {
      const double v = (static_cast<double>(strata[i]) + rng.uniform()) / static_cast<double>(count);
      pts[i][d] = std::min(v, std::nextafter((strata[i] + 1.0) / count, 0.0));
    }
  }
  return pts;
}

void clamp_unit(std::span<double> x) {
  for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
}

Evaluator::Evaluator(const BlackBox& box, long budget, int workers)
    : box_(box), budget_(budget), workers_(std::max(1, workers)) {
  if (budget < 0) throw Error("budget must be >= 0");
}

std::vector<EvaluationRecord> Evaluator::evaluate_batch(std::span<const Point> points) {
  if (remaining() <= 0) throw BudgetExhausted("evaluation budget exhausted");
  const std::size_t dim = box_.dimension();

  struct Slot {
    Point x;
    std::optional<Evaluation> eval;  // set when served without simulation
    long task = -1;                  // index into `fresh` otherwise
    bool cached = false;
  };
  std::vector<Slot> slots;
  std::vector<Point> fresh;
  std::map<Point, long> fresh_lookup;  // duplicates inside this batch
  long allowance = remaining();

  {
    std::scoped_lock lock(cache_mutex_);
    for (const auto& p : points) {
      if (p.size() != dim) throw Error("decision vector has the wrong dimension");
      Slot s{p, std::nullopt, -1, false};
      clamp_unit(s.x);
      if (auto it = cache_.find(s.x); it != cache_.end()) {
        s.eval = it->second;
        s.cached = true;
      } else if (auto f = fresh_lookup.find(s.x); f != fresh_lookup.end()) {
        s.task = f->second;
        s.cached = true;
      } else if (auto why = box_.screen(s.x)) {
        s.eval = Evaluation::rejected(*why);
        cache_.emplace(s.x, *s.eval);
      } else {
        if (allowance == 0) break;
        --allowance;
        s.task = static_cast<long>(fresh.size());
        fresh_lookup.emplace(s.x, s.task);
        fresh.push_back(s.x);
      }
      slots.push_back(std::move(s));
    }
  }

  std::vector<Evaluation> results(fresh.size());
  auto run_one = [&](std::size_t t) {
    try {
      results[t] = box_.evaluate(fresh[t]);
    } catch (const std::exception& e) {
      results[t] = Evaluation::failed(e.what());
    }
  };
  const auto nworkers = std::min<std::size_t>(static_cast<std::size_t>(workers_), fresh.size());
  if (nworkers <= 1) {
    for (std::size_t t = 0; t < fresh.size(); ++t) run_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(nworkers);
    for (std::size_t w = 0; w < nworkers; ++w)
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < fresh.size(); t = next++) run_one(t);
      });
  }

  {
    std::scoped_lock lock(cache_mutex_);
    for (std::size_t t = 0; t < fresh.size(); ++t) cache_.emplace(fresh[t], results[t]);
  }

  std::vector<EvaluationRecord> out;
  out.reserve(slots.size());
  std::vector<bool> counted(fresh.size(), false);
  for (auto& s : slots) {
    EvaluationRecord rec;
    rec.x = std::move(s.x);
    rec.cached = s.cached;
    if (s.eval) {
      rec.eval = *s.eval;
    } else {
      rec.eval = results[static_cast<std::size_t>(s.task)];
      if (!counted[static_cast<std::size_t>(s.task)]) {
        counted[static_cast<std::size_t>(s.task)] = true;
        ++used_;
      }
    }
    rec.index = next_index_++;
    rec.simulations = used_;
    rec.stage = stage_;
    history_.push_back(rec);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<double> convergence_series(std::span<const EvaluationRecord> history) {
  std::vector<double> series;
  double best = std::numeric_limits<double>::quiet_NaN();
  long sims = 0;
  for (const auto& r : history) {
    if (r.eval.valid() && r.eval.feasible && !(r.eval.npv <= best)) best = r.eval.npv;
    while (sims < r.simulations) {
      series.push_back(best);
      ++sims;
    }
  }
  return series;
}

}  // namespace wellopt

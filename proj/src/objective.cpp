#include "wellopt/objective.hpp"

#include <algorithm>
#include <cmath>

#include "wellopt/errors.hpp"

namespace wellopt {

const char* to_string(EvalStatus status) {
  switch (status) {
    case EvalStatus::Ok:
      return "ok";
    case EvalStatus::Rejected:
      return "rejected";
    case EvalStatus::Failed:
      return "failed";
  }
  return "?";
}

bool better(const Evaluation& a, const Evaluation& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible) return a.h < b.h;
  return a.npv > b.npv;
}

void EconomicParams::validate() const {
  if (c_o < 0 || c_w_inj < 0 || c_w_disp < 0 || r < 0 || base_drill_cost < 0 ||
      drill_cost_per_m < 0)
    throw Error("economic parameters must be nonnegative");
}

void RateLimits::validate() const {
  if ((q_max_inj && !(*q_max_inj > 0)) || (q_max_prod && !(*q_max_prod > 0)))
    throw Error("rate limits must be positive when present");
}

double drilling_cost(std::span<const WellSpec> wells, const EconomicParams& econ) {
  double cost = 0.0;
  for (const auto& w : wells) cost += econ.base_drill_cost + econ.drill_cost_per_m * w.costed_length();
  return cost;
}

double npv(const SimulationResult& result, std::span<const WellSpec> wells,
           const EconomicParams& econ) {
  if (!result.converged) throw NotConverged("npv needs a converged simulation");
  double value = 0.0;
  double t_start = 0.0;
  for (std::size_t s = 0; s < result.times.size(); ++s) {
    const double dt = result.step_days[s];
    const double t_mid_years = (t_start + 0.5 * dt) / kDaysPerYear;
    t_start = result.times[s];
    double cash = 0.0;  // $/day
    for (const auto& w : result.wells) {
      if (w.role == WellRole::Producer)
        cash += econ.c_o * to_barrels(w.q_o[s]) - econ.c_w_disp * to_barrels(w.q_w[s]);
      else
        cash -= econ.c_w_inj * to_barrels(w.q_w[s]);
    }
    value += cash * dt * std::pow(1.0 + econ.r, -t_mid_years);
  }
  return value - drilling_cost(wells, econ);
}

double constraint_violation(const SimulationResult& result, const RateLimits& limits) {
  if (!result.converged) throw NotConverged("constraint violation needs a converged simulation");
  double h = 0.0;
  for (const auto& w : result.wells) {
    const auto& limit = w.role == WellRole::Producer ? limits.q_max_prod : limits.q_max_inj;
    if (!limit) continue;
    for (std::size_t s = 0; s < result.times.size(); ++s) {
      const double q = w.role == WellRole::Producer ? w.q_o[s] + w.q_w[s] : w.q_w[s];
      h += std::max(q - *limit, 0.0) * result.step_days[s];
    }
  }
  return h;
}

double feasibility_tolerance(const RateLimits& limits, double period_years) {
  if (!limits.any()) return 0.0;
  const double q_ref = std::max(limits.q_max_inj.value_or(0.0), limits.q_max_prod.value_or(0.0));
  return 1.0e-3 * q_ref * period_years * kDaysPerYear;
}

}  // namespace wellopt

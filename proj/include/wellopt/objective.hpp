#pragma once

#include <optional>
#include <span>

#include "wellopt/evaluation.hpp"
#include "wellopt/geometry.hpp"
#include "wellopt/simulator.hpp"

namespace wellopt {

constexpr double kBarrelsPerCubicMetre = 6.2898;

inline double to_barrels(double cubic_metres) { return cubic_metres * kBarrelsPerCubicMetre; }
inline double to_cubic_metres(double barrels) { return barrels / kBarrelsPerCubicMetre; }

/// Prices in $/barrel, costs in $.
struct EconomicParams {
  double c_o = 80.0;
  double c_w_inj = 8.0;
  double c_w_disp = 12.0;
  double r = 0.10;
  double base_drill_cost = 25.0e6;
  double drill_cost_per_m = 50.0e3;

  void validate() const;
};

/// Maximum rates in m^3/day. Absent limits leave that well role unconstrained.
struct RateLimits {
  std::optional<double> q_max_inj;
  std::optional<double> q_max_prod;

  bool any() const { return q_max_inj.has_value() || q_max_prod.has_value(); }
  void validate() const;
};

/// Base cost per well plus a per-metre cost for wells parameterized by a length.
double drilling_cost(std::span<const WellSpec> wells, const EconomicParams& econ);

/// Discounted cash flow, one term per report step discounted at the step midpoint, minus
/// drilling costs at t = 0. Throws NotConverged for a failed simulation.
double npv(const SimulationResult& result, std::span<const WellSpec> wells,
           const EconomicParams& econ);

/// Integrated rate excess over the limits, m^3 (rates in m^3/day times days).
double constraint_violation(const SimulationResult& result, const RateLimits& limits);

/// 1e-3 * q_ref * T_days with q_ref the largest configured limit; zero when unconstrained.
double feasibility_tolerance(const RateLimits& limits, double period_years);

inline bool feasibility(double h, double tolerance) { return h <= tolerance; }

}  // namespace wellopt

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wellopt/core.hpp"
#include "wellopt/geometry.hpp"
#include "wellopt/objective.hpp"
#include "wellopt/reservoir.hpp"
#include "wellopt/simulator.hpp"

namespace wellopt {

struct VariableDescriptor {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  bool periodic = false;  // decoded modulo the range
  bool integer = false;   // decoded by nearest-integer rounding

  double decode(double v) const;
  /// Inverse of decode, nudged so that decode(encode(x)) == x whenever x is representable.
  double encode(double physical) const;
};

struct WellTemplate {
  WellRole role = WellRole::Producer;
  ShapeKind kind = ShapeKind::Vertical;
  std::string label;
};

struct PositionBounds {
  double l_min = 100.0, l_max = 320.0;  // metres
  double phi_min = 0.0, phi_max = 10.0; // degrees
  Bounds z_injector{0.0, 0.0};          // heel depth below the top, metres
  Bounds z_producer{0.0, 0.0};
  int horizontal_layer = 0;
};

/// Per-role BHP held constant over the whole period (sequential stage 1).
struct FixedControls {
  double injector = 0.0;
  double producer = 0.0;
};

struct ProblemSpec {
  std::shared_ptr<const ReservoirModel> model;
  std::vector<WellTemplate> wells;
  PositionBounds positions;
  double period_years = 10.0;
  double interval_years = 2.0;
  BhpBounds injector_bhp{300.0, 450.0};
  BhpBounds producer_bhp{125.0, 260.0};
  std::optional<FixedControls> fixed_controls;
  RateLimits limits;
  EconomicParams econ;
  SimulatorOptions simulator;
  double r_well = 0.1;
  long budget = 12000;

  int intervals() const;
  void validate() const;
};

/// Physical well specs and BHP schedule for one decision vector.
struct Candidate {
  std::vector<WellSpec> wells;
  ControlSchedule schedule;
};

/// Full result of scoring a candidate, including the simulation.
struct Scored {
  Evaluation eval;
  std::optional<SimulationResult> simulation;
};

/// The well placement and control problem as a black box over [0, 1]^N. Positional variables
/// for all wells come first (in well order), followed by one BHP per well per interval unless
/// controls are fixed.
class ReservoirProblem final : public BlackBox {
 public:
  explicit ReservoirProblem(ProblemSpec spec);

  std::size_t dimension() const override { return variables_.size(); }
  std::optional<std::string> screen(std::span<const double> x) const override;
  Evaluation evaluate(std::span<const double> x) const override;

  const ProblemSpec& spec() const { return spec_; }
  const std::vector<VariableDescriptor>& variables() const { return variables_; }
  std::size_t positional_dimension() const { return positional_; }
  double feasibility_tolerance() const;

  Candidate decode(std::span<const double> x) const;
  Point encode(const Candidate& candidate) const;

  /// Simulate and score a physical candidate, keeping the simulation for output.
  Scored score(const Candidate& candidate) const;

  /// Same problem with controls pinned; its vector is the positional prefix of this one.
  ReservoirProblem with_fixed_controls(FixedControls controls) const;
  /// Lift a vector of a fixed-control restriction back into this problem's space.
  Point lift(std::span<const double> positional, const FixedControls& controls) const;

 private:
  ProblemSpec spec_;
  std::vector<VariableDescriptor> variables_;
  std::size_t positional_ = 0;
};

}  // namespace wellopt

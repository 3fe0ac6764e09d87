#include "wellopt/problem.hpp"

#include <cmath>

#include <fmt/format.h>

#include "wellopt/errors.hpp"

namespace wellopt {

double VariableDescriptor::decode(double v) const {
  const double span = upper - lower;
  if (integer) return static_cast<double>(std::lround(lower + v * span));
  if (periodic) return lower + std::fmod(v * span, span);
  return lower + v * span;
}

double VariableDescriptor::encode(double physical) const {
  const double span = upper - lower;
  if (!(span > 0)) return 0.0;
  if (periodic) {
    double wrapped = std::fmod(physical - lower, span);
    if (wrapped < 0) wrapped += span;
    physical = lower + wrapped;
  }
  double v = std::clamp((physical - lower) / span, 0.0, 1.0);
  if (integer) return v;
  // step by ulps until the affine map lands exactly on the requested value
  for (int tries = 0; tries < 8 && decode(v) != physical; ++tries) {
    const double toward = decode(v) < physical ? 1.0 : 0.0;
    v = std::nextafter(v, toward);
  }
  return v;
}

int ProblemSpec::intervals() const {
  return static_cast<int>(std::lround(period_years / interval_years));
}

void ProblemSpec::validate() const {
  if (!model) throw Error("problem has no reservoir model");
  model->validate();
  if (wells.empty()) throw Error("problem needs at least one well");
  if (!(interval_years > 0) || !(period_years > 0)) throw Error("period and interval must be > 0");
  if (std::abs(intervals() * interval_years - period_years) > 1e-9 * period_years)
    throw Error("control interval must divide the production period");
  if (!(injector_bhp.lower < injector_bhp.upper) || !(producer_bhp.lower < producer_bhp.upper))
    throw Error("BHP bounds must satisfy lower < upper");
  if (!(positions.l_min > 0) || positions.l_min > positions.l_max)
    throw Error("well length bounds must satisfy 0 < l_min <= l_max");
  if (positions.phi_min > positions.phi_max) throw Error("phi bounds out of order");
  if (fixed_controls && (!injector_bhp.contains(fixed_controls->injector) ||
                         !producer_bhp.contains(fixed_controls->producer)))
    throw Error("fixed controls lie outside the BHP bounds");
  limits.validate();
  econ.validate();
  if (!(r_well > 0)) throw Error("well radius must be > 0");
  if (budget < 0) throw Error("budget must be >= 0");
}

ReservoirProblem::ReservoirProblem(ProblemSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const auto& g = spec_.model->grid;
  const auto& pb = spec_.positions;
  for (const auto& w : spec_.wells) {
    const auto& name = w.label;
    switch (w.kind) {
      case ShapeKind::Vertical:
        variables_.push_back({name + ".x", 0.0, g.nx - 1.0, false, true});
        variables_.push_back({name + ".y", 0.0, g.ny - 1.0, false, true});
        break;
      case ShapeKind::Horizontal:
        variables_.push_back({name + ".x", 0.0, g.length_x()});
        variables_.push_back({name + ".y", 0.0, g.length_y()});
        variables_.push_back({name + ".l", pb.l_min, pb.l_max});
        variables_.push_back({name + ".theta", 0.0, 360.0, true, false});
        break;
      case ShapeKind::Inclined: {
        const auto& z = w.role == WellRole::Injector ? pb.z_injector : pb.z_producer;
        variables_.push_back({name + ".x", 0.0, g.length_x()});
        variables_.push_back({name + ".y", 0.0, g.length_y()});
        variables_.push_back({name + ".z", z.lower, z.upper});
        variables_.push_back({name + ".l", pb.l_min, pb.l_max});
        variables_.push_back({name + ".theta", 0.0, 360.0, true, false});
        variables_.push_back({name + ".phi", pb.phi_min, pb.phi_max});
        break;
      }
    }
  }
  positional_ = variables_.size();
  if (!spec_.fixed_controls) {
    for (const auto& w : spec_.wells) {
      const auto& b = w.role == WellRole::Injector ? spec_.injector_bhp : spec_.producer_bhp;
      for (int m = 0; m < spec_.intervals(); ++m)
        variables_.push_back({fmt::format("{}.bhp{}", w.label, m), b.lower, b.upper});
    }
  }
}

double ReservoirProblem::feasibility_tolerance() const {
  return wellopt::feasibility_tolerance(spec_.limits, spec_.period_years);
}

Candidate ReservoirProblem::decode(std::span<const double> x) const {
  if (x.size() != dimension()) throw Error("decision vector has the wrong dimension");
  Candidate c;
  std::size_t v = 0;
  auto next = [&] {
    const double value = variables_[v].decode(x[v]);
    ++v;
    return value;
  };
  for (const auto& w : spec_.wells) {
    WellSpec spec{w.role, VerticalWell{}, w.label};
    switch (w.kind) {
      case ShapeKind::Vertical: {
        VerticalWell s;
        s.x_idx = static_cast<int>(next());
        s.y_idx = static_cast<int>(next());
        spec.shape = s;
        break;
      }
      case ShapeKind::Horizontal: {
        HorizontalWell s;
        s.x = next();
        s.y = next();
        s.l = next();
        s.theta = next();
        s.layer = spec_.positions.horizontal_layer;
        spec.shape = s;
        break;
      }
      case ShapeKind::Inclined: {
        InclinedWell s;
        s.x = next();
        s.y = next();
        s.z = next();
        s.l = next();
        s.theta = next();
        s.phi = next();
        spec.shape = s;
        break;
      }
    }
    c.wells.push_back(std::move(spec));
  }

  c.schedule.interval_years = spec_.interval_years;
  c.schedule.injector = spec_.injector_bhp;
  c.schedule.producer = spec_.producer_bhp;
  const auto intervals = static_cast<std::size_t>(spec_.intervals());
  for (const auto& w : spec_.wells) {
    std::vector<double> row(intervals);
    for (auto& p : row) {
      if (spec_.fixed_controls)
        p = w.role == WellRole::Injector ? spec_.fixed_controls->injector
                                         : spec_.fixed_controls->producer;
      else
        p = next();
    }
    c.schedule.bhp.push_back(std::move(row));
  }
  return c;
}

Point ReservoirProblem::encode(const Candidate& candidate) const {
  if (candidate.wells.size() != spec_.wells.size()) throw Error("candidate has the wrong well count");
  Point x;
  x.reserve(dimension());
  auto put = [&](double physical) {
    x.push_back(variables_[x.size()].encode(physical));
  };
  for (const auto& w : candidate.wells) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, VerticalWell>) {
            put(s.x_idx);
            put(s.y_idx);
          } else if constexpr (std::is_same_v<T, HorizontalWell>) {
            put(s.x);
            put(s.y);
            put(s.l);
            put(s.theta);
          } else {
            put(s.x);
            put(s.y);
            put(s.z);
            put(s.l);
            put(s.theta);
            put(s.phi);
          }
        },
        w.shape);
  }
  if (!spec_.fixed_controls)
    for (const auto& row : candidate.schedule.bhp)
      for (double p : row) put(p);
  if (x.size() != dimension()) throw Error("candidate shape does not match the problem template");
  return x;
}

std::optional<std::string> ReservoirProblem::screen(std::span<const double> x) const {
  const Candidate c = decode(x);
  if (auto check = validate_configuration(c.wells, spec_.model->grid); !check)
    return check.reason;
  return std::nullopt;
}

Scored ReservoirProblem::score(const Candidate& candidate) const {
  if (auto check = validate_configuration(candidate.wells, spec_.model->grid); !check)
    return {Evaluation::rejected(check.reason), std::nullopt};
  std::vector<CompletedWell> completed;
  try {
    completed = complete_wells(candidate.wells, *spec_.model, spec_.r_well);
  } catch (const DegenerateIndex& e) {
    return {Evaluation::rejected(e.what()), std::nullopt};
  }
  SimulationResult sim;
  try {
    sim = simulate(*spec_.model, completed, candidate.schedule, spec_.simulator);
  } catch (const SolverFailed& e) {
    return {Evaluation::failed(e.what()), std::nullopt};
  }
  const double value = npv(sim, candidate.wells, spec_.econ);
  const double h = constraint_violation(sim, spec_.limits);
  return {Evaluation::ok(value, h, feasibility_tolerance()), std::move(sim)};
}

Evaluation ReservoirProblem::evaluate(std::span<const double> x) const {
  return score(decode(x)).eval;
}

ReservoirProblem ReservoirProblem::with_fixed_controls(FixedControls controls) const {
  ProblemSpec s = spec_;
  s.fixed_controls = controls;
  return ReservoirProblem(std::move(s));
}

Point ReservoirProblem::lift(std::span<const double> positional,
                             const FixedControls& controls) const {
  if (spec_.fixed_controls) throw Error("lift needs a problem with free controls");
  if (positional.size() != positional_) throw Error("positional vector has the wrong dimension");
  Point x(positional.begin(), positional.end());
  for (const auto& w : spec_.wells) {
    const double p = w.role == WellRole::Injector ? controls.injector : controls.producer;
    for (int m = 0; m < spec_.intervals(); ++m) x.push_back(variables_[x.size()].encode(p));
  }
  return x;
}

}  // namespace wellopt

#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "wellopt/geometry.hpp"
#include "wellopt/problem.hpp"
#include "wellopt/reservoir.hpp"
#include "wellopt/simulator.hpp"

namespace wellopt::fixtures {

inline RockModel uniform_rock(const GridGeometry& g, double k, double kz, double phi) {
  RockModel r;
  r.perm_x.assign(g.cell_count(), k);
  r.perm_y.assign(g.cell_count(), k);
  r.perm_z.assign(g.cell_count(), kz);
  r.porosity.assign(g.cell_count(), phi);
  return r;
}

inline std::shared_ptr<ReservoirModel> uniform_model(const GridGeometry& g, double k = 100.0,
                                                     double phi = 0.2) {
  auto m = std::make_shared<ReservoirModel>();
  m->grid = g;
  m->rock = uniform_rock(g, k, 0.1 * k, phi);
  m->initial = make_initial_state(g, m->fluids, {});
  return m;
}

inline std::shared_ptr<ReservoirModel> field_model(const GridGeometry& g, std::uint64_t seed,
                                                   double correlation_length = 300.0) {
  auto m = std::make_shared<ReservoirModel>();
  m->grid = g;
  FieldParams fp;
  fp.correlation_length = correlation_length;
  m->rock = generate_field(seed, g, fp);
  m->initial = make_initial_state(g, m->fluids, {});
  return m;
}

inline WellSpec vertical(WellRole role, int i, int j, std::string label) {
  return {role, VerticalWell{i, j}, std::move(label)};
}

/// 10x10 single layer, one injector and one producer, vertical.
inline ProblemSpec small_vertical_spec(std::uint64_t field_seed = 3) {
  ProblemSpec s;
  s.model = field_model({10, 10, 1, 120.0, 120.0, 10.0, 2000.0}, field_seed);
  s.wells = {{WellRole::Injector, ShapeKind::Vertical, "I1"},
             {WellRole::Producer, ShapeKind::Vertical, "P1"}};
  return s;
}

/// Corey water fractional flow written out from the curve definitions.
inline double corey_fw(double s, const FluidModel& f) {
  const double se = std::clamp((s - f.swc) / (1.0 - f.swc - f.sor), 0.0, 1.0);
  const double lw = f.krw_end * std::pow(se, f.corey_nw) / f.mu_w;
  const double lo = f.kro_end * std::pow(1.0 - se, f.corey_no) / f.mu_o;
  return lw / (lw + lo);
}

/// Welge tangent from the initial saturation: shock saturation and f/(s - s_i) at the shock.
struct Welge {
  double s_front = 0.0;
  double slope = 0.0;
};

inline Welge welge_tangent(const FluidModel& f, double s_init) {
  Welge best;
  const int n = 200000;
  for (int i = 1; i <= n; ++i) {
    const double s = s_init + (f.s_max() - s_init) * i / n;
    const double slope = corey_fw(s, f) / (s - s_init);
    if (slope > best.slope) best = {s, slope};
  }
  return best;
}

}  // namespace wellopt::fixtures

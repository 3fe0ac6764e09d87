#include "wellopt/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "wellopt/errors.hpp"

namespace wellopt {

namespace {

// Corey curves get evaluated per cell per sub-step; avoid pow for the common square case.
double corey_power(double x, double n) { return n == 2.0 ? x * x : std::pow(x, n); }

struct MobilityTable {
  const FluidModel& f;
  double inv_span;

  explicit MobilityTable(const FluidModel& fluids)
      : f(fluids), inv_span(1.0 / (1.0 - fluids.swc - fluids.sor)) {}

  void eval(double s, double& lw, double& lo) const {
    const double se = std::clamp((s - f.swc) * inv_span, 0.0, 1.0);
    lw = f.krw_end * corey_power(se, f.corey_nw) / f.mu_w;
    lo = f.kro_end * corey_power(1.0 - se, f.corey_no) / f.mu_o;
  }
  double total(double s) const {
    double lw, lo;
    eval(s, lw, lo);
    return lw + lo;
  }
  double frac(double s) const {
    double lw, lo;
    eval(s, lw, lo);
    return lw / (lw + lo);
  }
};

double total_compressibility(double s_w, const ReservoirModel& m) {
  return m.rock.compressibility + s_w * m.fluids.c_w + (1.0 - s_w) * m.fluids.c_o;
}

}  // namespace

void ControlSchedule::validate(std::span<const WellSpec> wells) const {
  if (!(interval_years > 0)) throw Error("control interval must be > 0");
  if (bhp.size() != wells.size()) throw Error("schedule must have one BHP row per well");
  for (std::size_t w = 0; w < wells.size(); ++w) {
    if (bhp[w].size() != bhp.front().size() || bhp[w].empty())
      throw Error("every well needs the same, nonzero number of control intervals");
    const auto& b = bounds(wells[w].role);
    for (double p : bhp[w])
      if (!b.contains(p))
        throw Error(fmt::format("BHP {} bar for well {} outside [{}, {}]", p, wells[w].label,
                                b.lower, b.upper));
  }
}

std::vector<Connection> build_connections(const ReservoirModel& model) {
  const auto& g = model.grid;
  const auto& r = model.rock;
  std::vector<Connection> out;
  out.reserve(3 * g.cell_count());
  auto harmonic = [](double ka, double kb) { return 2.0 * ka * kb / (ka + kb); };
  for (int k = 0; k < g.nz; ++k) {
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const auto c = g.linear({i, j, k});
        if (i + 1 < g.nx) {
          const auto n = g.linear({i + 1, j, k});
          out.push_back({c, n, kDarcyMetric * g.dy * g.dz / g.dx * harmonic(r.perm_x[c], r.perm_x[n])});
        }
        if (j + 1 < g.ny) {
          const auto n = g.linear({i, j + 1, k});
          out.push_back({c, n, kDarcyMetric * g.dx * g.dz / g.dy * harmonic(r.perm_y[c], r.perm_y[n])});
        }
        if (k + 1 < g.nz) {
          const auto n = g.linear({i, j, k + 1});
          out.push_back({c, n, kDarcyMetric * g.dx * g.dy / g.dz * harmonic(r.perm_z[c], r.perm_z[n])});
        }
      }
    }
  }
  return out;
}

double perforation_mobility(WellRole role, double cell_saturation, const FluidModel& fluids) {
  if (role == WellRole::Injector) return relperm(1.0, fluids).krw / fluids.mu_w;
  return total_mobility(cell_saturation, fluids);
}

PressureSystem pressure_matrix_assemble(const FlowState& state, const ReservoirModel& model,
                                        std::span<const Connection> connections,
                                        std::span<const CompletedWell> wells,
                                        std::span<const double> bhp_now, double dt,
                                        const std::vector<std::vector<char>>& active) {
  const auto n = model.grid.cell_count();
  const double volume = model.grid.cell_volume();
  const MobilityTable mob(model.fluids);

  PressureSystem sys;
  sys.rhs.resize(static_cast<Eigen::Index>(n));
  std::vector<double> diag(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double acc = model.rock.porosity[c] * volume *
                       total_compressibility(state.saturation[c], model) / dt;
    diag[c] = acc;
    sys.rhs[static_cast<Eigen::Index>(c)] = acc * state.pressure[c];
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n + 2 * connections.size());
  sys.face_mobility.resize(connections.size());
  for (std::size_t f = 0; f < connections.size(); ++f) {
    const auto& con = connections[f];
    const std::size_t up = state.pressure[con.a] >= state.pressure[con.b] ? con.a : con.b;
    const double lam = mob.total(state.saturation[up]);
    sys.face_mobility[f] = lam;
    const double coef = con.trans * lam;
    diag[con.a] += coef;
    diag[con.b] += coef;
    triplets.emplace_back(static_cast<int>(con.a), static_cast<int>(con.b), -coef);
    triplets.emplace_back(static_cast<int>(con.b), static_cast<int>(con.a), -coef);
  }

  for (std::size_t w = 0; w < wells.size(); ++w) {
    const auto& well = wells[w];
    for (std::size_t p = 0; p < well.perforations.size(); ++p) {
      if (!active.empty() && !active[w][p]) continue;
      const auto& perf = well.perforations[p];
      const auto c = model.grid.linear(perf.cell);
      const double coef =
          perf.well_index * perforation_mobility(well.spec.role, state.saturation[c], model.fluids);
      diag[c] += coef;
      sys.rhs[static_cast<Eigen::Index>(c)] += coef * bhp_now[w];
    }
  }
  for (std::size_t c = 0; c < n; ++c)
    triplets.emplace_back(static_cast<int>(c), static_cast<int>(c), diag[c]);

  sys.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

std::vector<double> report_times(const ControlSchedule& schedule, double report_step_days) {
  const double interval_days = schedule.interval_years * kDaysPerYear;
  std::vector<double> t{0.0};
  for (int m = 0; m < schedule.intervals(); ++m) {
    const double start = m * interval_days;
    const double end = (m + 1) * interval_days;
    for (int s = 1;; ++s) {
      const double next = start + s * report_step_days;
      if (next >= end - 1.0e-9) {
        t.push_back(end);
        break;
      }
      t.push_back(next);
    }
  }
  return t;
}

SimulationResult simulate(const ReservoirModel& model, std::span<const CompletedWell> wells,
                          const ControlSchedule& schedule, const SimulatorOptions& options) {
  const auto& g = model.grid;
  const auto n = g.cell_count();
  const double volume = g.cell_volume();
  const MobilityTable mob(model.fluids);
  const double fmax = max_fractional_flow_slope(model.fluids);
  const double s_lo = model.fluids.swc;
  const double s_hi = model.fluids.s_max();

  std::vector<WellSpec> specs;
  for (const auto& w : wells) specs.push_back(w.spec);
  schedule.validate(specs);

  const auto connections = build_connections(model);
  std::vector<double> pore_volume(n);
  for (std::size_t c = 0; c < n; ++c) pore_volume[c] = model.rock.porosity[c] * volume;

  FlowState state{model.initial.p_init, model.initial.s_w_init};
  // initial saturations outside the mobile range are legal; transport keeps them in range
  const std::vector<double> s_start = state.saturation;

  SimulationResult result;
  const auto bounds = report_times(schedule, options.report_step_days);
  const std::size_t steps = bounds.size() - 1;
  result.times.assign(bounds.begin() + 1, bounds.end());
  result.step_days.resize(steps);
  for (const auto& w : wells) {
    result.wells.push_back({w.spec.label, w.spec.role, std::vector<double>(steps, 0.0),
                            std::vector<double>(steps, 0.0)});
  }

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(options.cg_tolerance);
  cg.setMaxIterations(options.cg_max_iterations);
  // the sparsity pattern never changes, so the fill-reducing ordering is computed once
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool pattern_ready = false;
  const bool direct = options.solver == PressureSolver::Cholesky;

  const double interval_days = schedule.interval_years * kDaysPerYear;
  std::vector<double> bhp_now(wells.size());
  std::vector<std::vector<char>> active(wells.size());
  std::vector<std::vector<double>> perf_rate(wells.size());  // m^3/day, >= 0
  for (std::size_t w = 0; w < wells.size(); ++w) perf_rate[w].resize(wells[w].perforations.size());

  std::vector<double> face_flux(connections.size());
  std::vector<double> inflow(n), outflow(n), frac(n), d_water(n);
  Eigen::VectorXd guess(static_cast<Eigen::Index>(n));
  double water_injected = 0.0, water_produced = 0.0;

  for (std::size_t step = 0; step < steps; ++step) {
    const double t0 = bounds[step];
    const double dt = bounds[step + 1] - t0;
    result.step_days[step] = dt;
    const int interval = std::min(schedule.intervals() - 1,
                                  static_cast<int>(std::floor((t0 + 0.5 * dt) / interval_days)));
    for (std::size_t w = 0; w < wells.size(); ++w) {
      bhp_now[w] = schedule.bhp[w][static_cast<std::size_t>(interval)];
      active[w].assign(wells[w].perforations.size(), 1);
    }

    // Active-set loop: perforations that would flow against their role are shut and the
    // pressure re-solved, so rates stay one-signed and the balance stays exact.
    Eigen::VectorXd p_new;
    PressureSystem sys;
    for (int iter = 0;; ++iter) {
      sys = pressure_matrix_assemble(state, model, connections, wells, bhp_now, dt, active);
      for (std::size_t c = 0; c < n; ++c) guess[static_cast<Eigen::Index>(c)] = state.pressure[c];
      bool solved = false;
      if (direct) {
        if (!pattern_ready) {
          ldlt.analyzePattern(sys.matrix);
          pattern_ready = true;
        }
        ldlt.factorize(sys.matrix);
        if (ldlt.info() == Eigen::Success) {
          p_new = ldlt.solve(sys.rhs);
          solved = ldlt.info() == Eigen::Success;
        }
      } else {
        cg.compute(sys.matrix);
        p_new = cg.solveWithGuess(sys.rhs, guess);
        solved = cg.info() == Eigen::Success;
      }
      ++result.pressure_solves;
      if (!solved || !p_new.allFinite())
        throw SolverFailed(fmt::format("pressure solve failed at t = {} days", t0));
      bool changed = false;
      for (std::size_t w = 0; w < wells.size(); ++w) {
        const auto role = wells[w].spec.role;
        for (std::size_t p = 0; p < wells[w].perforations.size(); ++p) {
          const auto& perf = wells[w].perforations[p];
          const auto c = g.linear(perf.cell);
          const double drive = role == WellRole::Injector ? bhp_now[w] - p_new[static_cast<Eigen::Index>(c)]
                                                          : p_new[static_cast<Eigen::Index>(c)] - bhp_now[w];
          double q = 0.0;
          if (active[w][p]) {
            q = perf.well_index * perforation_mobility(role, state.saturation[c], model.fluids) *
                drive;
            if (q < 0.0) {
              active[w][p] = 0;
              changed = true;
              q = 0.0;
            }
          }
          perf_rate[w][p] = q;
        }
      }
      if (!changed) break;
      if (iter + 1 >= options.max_active_set_iterations) {
        throw SolverFailed(fmt::format("well active set did not settle at t = {} days", t0));
      }
    }

    double storage = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      storage += pore_volume[c] * total_compressibility(state.saturation[c], model) *
                 (p_new[static_cast<Eigen::Index>(c)] - state.pressure[c]);
    }
    result.storage_change += storage;

    std::fill(inflow.begin(), inflow.end(), 0.0);
    std::fill(outflow.begin(), outflow.end(), 0.0);
    for (std::size_t f = 0; f < connections.size(); ++f) {
      const auto& con = connections[f];
      const double flux = con.trans * sys.face_mobility[f] *
                          (p_new[static_cast<Eigen::Index>(con.a)] -
                           p_new[static_cast<Eigen::Index>(con.b)]);
      face_flux[f] = flux;
      if (flux >= 0) {
        outflow[con.a] += flux;
        inflow[con.b] += flux;
      } else {
        outflow[con.b] -= flux;
        inflow[con.a] -= flux;
      }
    }
    for (std::size_t w = 0; w < wells.size(); ++w) {
      for (std::size_t p = 0; p < wells[w].perforations.size(); ++p) {
        const auto c = g.linear(wells[w].perforations[p].cell);
        (wells[w].spec.role == WellRole::Injector ? inflow : outflow)[c] += perf_rate[w][p];
      }
    }

    double dt_cfl = dt;
    for (std::size_t c = 0; c < n; ++c) {
      const double through = std::max(inflow[c], outflow[c]);
      if (through > 0) dt_cfl = std::min(dt_cfl, options.cfl * pore_volume[c] / (fmax * through));
    }
    const double sub_count = std::ceil(dt / dt_cfl - 1.0e-12);
    if (!(sub_count <= options.max_substeps_per_step))
      throw SolverFailed(fmt::format("CFL limit needs {} sub-steps at t = {} days", sub_count, t0));
    const int subs = std::max(1, static_cast<int>(sub_count));
    const double dts = dt / subs;
    result.transport_substeps += subs;

    for (int sub = 0; sub < subs; ++sub) {
      for (std::size_t c = 0; c < n; ++c) frac[c] = mob.frac(state.saturation[c]);
      std::fill(d_water.begin(), d_water.end(), 0.0);
      for (std::size_t f = 0; f < connections.size(); ++f) {
        const auto& con = connections[f];
        const double flux = face_flux[f];
        const double water = flux >= 0 ? frac[con.a] * flux : frac[con.b] * flux;
        d_water[con.a] -= water;
        d_water[con.b] += water;
      }
      for (std::size_t w = 0; w < wells.size(); ++w) {
        auto& series = result.wells[w];
        const bool inj = wells[w].spec.role == WellRole::Injector;
        for (std::size_t p = 0; p < wells[w].perforations.size(); ++p) {
          const auto c = g.linear(wells[w].perforations[p].cell);
          const double q = perf_rate[w][p];
          if (inj) {
            d_water[c] += q;
            series.q_w[step] += q * dts;
            water_injected += q * dts;
          } else {
            const double qw = frac[c] * q;
            d_water[c] -= qw;
            series.q_w[step] += qw * dts;
            series.q_o[step] += (q - qw) * dts;
            water_produced += qw * dts;
          }
        }
      }
      for (std::size_t c = 0; c < n; ++c) {
        double s = state.saturation[c] + dts * d_water[c] / pore_volume[c];
        const double lo = std::min(s_lo, s_start[c]);
        const double hi = std::max(s_hi, s_start[c]);
        // compression can push a cell marginally past its end points; the clipped volume
        // shows up in the water balance error
        s = std::clamp(s, lo, hi);
        if (!std::isfinite(s)) throw SolverFailed("saturation update produced a non-finite value");
        state.saturation[c] = s;
      }
    }

    for (auto& series : result.wells) {
      series.q_w[step] /= dt;
      series.q_o[step] /= dt;
      const double q = series.role == WellRole::Injector ? series.q_w[step]
                                                         : series.q_o[step] + series.q_w[step];
      (series.role == WellRole::Injector ? result.cum_injected : result.cum_produced) += q * dt;
    }
    for (std::size_t c = 0; c < n; ++c) state.pressure[c] = p_new[static_cast<Eigen::Index>(c)];
    if (options.keep_snapshots) result.saturation_snapshots.push_back(state.saturation);
  }

  double water_content_change = 0.0;
  for (std::size_t c = 0; c < n; ++c)
    water_content_change += pore_volume[c] * (state.saturation[c] - s_start[c]);
  const double throughput = result.cum_injected + result.cum_produced;
  if (throughput > 0) {
    const double total_err =
        std::abs(result.cum_injected - result.cum_produced - result.storage_change) / throughput;
    const double water_err =
        std::abs(water_injected - water_produced - water_content_change) / throughput;
    result.cum_balance_error = std::max(total_err, water_err);
  }
  result.converged = true;
  result.final_pressure = std::move(state.pressure);
  result.final_saturation = std::move(state.saturation);
  return result;
}

void write_rates_csv(std::ostream& out, const SimulationResult& result) {
  out << "time_days,well,role,q_oil,q_water\n";
  for (std::size_t s = 0; s < result.times.size(); ++s)
    for (const auto& w : result.wells)
      out << fmt::format("{:.17g},{},{},{:.17g},{:.17g}\n", result.times[s], w.label,
                         to_string(w.role), w.q_o[s], w.q_w[s]);
}

}  // namespace wellopt

#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "wellopt/geometry.hpp"
#include "wellopt/reservoir.hpp"

namespace wellopt {

constexpr double kDaysPerYear = 365.0;

using BhpBounds = Bounds;  // bar

/// Piecewise-constant BHP per well over equal control intervals.
struct ControlSchedule {
  double interval_years = 1.0;
  std::vector<std::vector<double>> bhp;  // [well][interval], bar
  BhpBounds injector{300.0, 450.0};
  BhpBounds producer{125.0, 260.0};

  int intervals() const { return bhp.empty() ? 0 : static_cast<int>(bhp.front().size()); }
  double period_years() const { return interval_years * intervals(); }
  const BhpBounds& bounds(WellRole role) const {
    return role == WellRole::Injector ? injector : producer;
  }
  /// Throws if a well has the wrong interval count or a BHP outside its role's bounds.
  void validate(std::span<const WellSpec> wells) const;
};

/// Report-step rate series for one well, m^3/day, both nonnegative. For injectors q_w is the
/// injection rate and q_o is identically zero.
struct WellSeries {
  std::string label;
  WellRole role = WellRole::Producer;
  std::vector<double> q_o;
  std::vector<double> q_w;
};

struct SimulationResult {
  std::vector<double> times;      // end of each report step, days
  std::vector<double> step_days;  // report-step lengths, days
  std::vector<WellSeries> wells;
  bool converged = false;
  double cum_balance_error = 0.0;  // relative, worst of total-fluid and water balances

  // diagnostics
  double cum_injected = 0.0;   // m^3
  double cum_produced = 0.0;   // m^3
  double storage_change = 0.0; // m^3, compressive
  int pressure_solves = 0;
  int transport_substeps = 0;
  std::vector<double> final_pressure;
  std::vector<double> final_saturation;
  std::vector<std::vector<double>> saturation_snapshots;  // one per report step, if requested
};

enum class PressureSolver { Cholesky, ConjugateGradient };

struct SimulatorOptions {
  double report_step_days = 30.0;
  double cfl = 0.5;
  PressureSolver solver = PressureSolver::Cholesky;
  // conjugate gradient with a diagonal preconditioner, used when solver says so
  double cg_tolerance = 1.0e-8;
  int cg_max_iterations = 20000;
  int max_substeps_per_step = 20000;
  int max_active_set_iterations = 8;
  bool keep_snapshots = false;
};

/// Face between two cells with geometric transmissibility (harmonic mean), in
/// m^3 cp / (day bar); multiplied by a mobility (1/cp) it gives a flow coefficient.
struct Connection {
  std::size_t a = 0;
  std::size_t b = 0;
  double trans = 0.0;
};

std::vector<Connection> build_connections(const ReservoirModel& model);

struct FlowState {
  std::vector<double> pressure;    // bar
  std::vector<double> saturation;  // water
};

struct PressureSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<double> face_mobility;  // upwinded total mobility per connection
};

/// Backward-Euler pressure system for a step of length dt (days): accumulation
/// phi V c_t / dt on the diagonal, upwinded T * lambda_t couplings, and WI * lambda on the
/// diagonal (WI * lambda * bhp on the right-hand side) for each active perforation.
/// `active` is per well, per perforation; empty means all active.
PressureSystem pressure_matrix_assemble(const FlowState& state, const ReservoirModel& model,
                                        std::span<const Connection> connections,
                                        std::span<const CompletedWell> wells,
                                        std::span<const double> bhp_now, double dt,
                                        const std::vector<std::vector<char>>& active = {});

/// Perforation mobility: injectors inject at the s_w = 1 end point, producers draw the
/// cell's total mobility.
double perforation_mobility(WellRole role, double cell_saturation, const FluidModel& fluids);

/// Report-step boundaries covering the schedule, never straddling a control change.
std::vector<double> report_times(const ControlSchedule& schedule, double report_step_days);

/// Two-phase IMPES run. Throws SolverFailed when the pressure solve or the CFL sub-stepping
/// breaks down.
SimulationResult simulate(const ReservoirModel& model, std::span<const CompletedWell> wells,
                          const ControlSchedule& schedule, const SimulatorOptions& options = {});

void write_rates_csv(std::ostream& out, const SimulationResult& result);

}  // namespace wellopt

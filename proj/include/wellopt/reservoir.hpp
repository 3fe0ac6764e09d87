#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace wellopt {

/// Cell (i, j, k) on a structured Cartesian grid. k counts layers downward from the top.
struct CellIndex {
  int i = 0;
  int j = 0;
  int k = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Closed interval [lower, upper].
struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v) const { return v >= lower && v <= upper; }
};

struct GridGeometry {
  int nx = 1, ny = 1, nz = 1;
  double dx = 1.0, dy = 1.0, dz = 1.0;  // metres
  double depth_top = 0.0;                // metres

  void validate() const;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  std::size_t linear(const CellIndex& c) const {
    return (static_cast<std::size_t>(c.k) * static_cast<std::size_t>(ny) +
            static_cast<std::size_t>(c.j)) *
               static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(c.i);
  }
  CellIndex cell(std::size_t linear_index) const;
  bool contains(const CellIndex& c) const {
    return c.i >= 0 && c.i < nx && c.j >= 0 && c.j < ny && c.k >= 0 && c.k < nz;
  }
  double length_x() const { return nx * dx; }
  double length_y() const { return ny * dy; }
  double thickness() const { return nz * dz; }
  double cell_volume() const { return dx * dy * dz; }
  /// Depth of the centre of layer k.
  double center_depth(int k) const { return depth_top + (k + 0.5) * dz; }
};

/// Per-cell rock properties, permeabilities in millidarcy.
struct RockModel {
  std::vector<double> perm_x, perm_y, perm_z;
  std::vector<double> porosity;
  double compressibility = 0.0;  // 1/bar

  void validate(const GridGeometry& grid) const;
};

struct FluidModel {
  double rho_w = 1000.0, rho_o = 860.0;  // kg/m^3
  double mu_w = 0.32, mu_o = 0.53;       // cp
  double c_w = 5.0e-5, c_o = 4.35e-5;    // 1/bar
  double corey_nw = 2.0, corey_no = 2.0;
  double swc = 0.2, sor = 0.2;
  double krw_end = 0.6, kro_end = 0.9;

  void validate() const;
  double s_max() const { return 1.0 - sor; }
};

struct RelPerm {
  double krw = 0.0;
  double kro = 0.0;
};

/// Corey curves over the normalized saturation clamp((s_w - swc) / (1 - swc - sor), 0, 1).
RelPerm relperm(double s_w, const FluidModel& fluids);

/// Water fractional flow (lambda_w / lambda_t) and total mobility in 1/cp.
double fractional_flow(double s_w, const FluidModel& fluids);
double total_mobility(double s_w, const FluidModel& fluids);
/// Largest df_w/ds_w over [swc, 1 - sor], sampled on a fine sweep.
double max_fractional_flow_slope(const FluidModel& fluids);

struct InitialState {
  std::vector<double> p_init;    // bar
  std::vector<double> s_w_init;  // fraction
  double owc_depth = 0.0;        // metres
};

struct InitialConditions {
  double p_datum = 280.0;     // bar, at the reservoir top
  double owc_depth = 1.0e9;   // metres; default puts the contact below everything
  double s_w_above = 0.2;     // water saturation above the contact
  bool hydrostatic = true;
};

/// Hydrostatic pressure from the datum and the oil-water contact split.
InitialState make_initial_state(const GridGeometry& grid, const FluidModel& fluids,
                                const InitialConditions& ic);

struct FieldParams {
  double log_mean = 4.605170185988092;  // ln(100 mD)
  double log_stddev = 1.0;
  double correlation_length = 200.0;    // metres
  double kz_anisotropy = 0.1;
  double porosity_mean = 0.2;
  double porosity_stddev = 0.0;
};

/// Seeded log-normal permeability field: white noise smoothed with a box window of the
/// correlation length, rescaled per cell to unit variance, then mapped to ln k.
RockModel generate_field(std::uint64_t seed, const GridGeometry& grid, const FieldParams& params);

/// Box window half-widths (cells) used by generate_field along x, y, z.
std::array<int, 3> smoothing_radius(const GridGeometry& grid, double correlation_length);

struct ReservoirModel {
  GridGeometry grid;
  RockModel rock;
  FluidModel fluids;
  InitialState initial;

  void validate() const;
};

/// Flat little-endian float64 arrays (perm_x, perm_y, perm_z, porosity) next to a JSON header.
/// `stem` gets ".json" and ".bin" appended.
void save_rock(const std::filesystem::path& stem, const GridGeometry& grid, const RockModel& rock);
RockModel load_rock(const std::filesystem::path& stem, const GridGeometry& grid);

}  // namespace wellopt

#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wellopt/reservoir.hpp"

namespace wellopt {

enum class WellRole { Injector, Producer };

const char* to_string(WellRole role);

/// Vertical well drilled through the centre of column (x_idx, y_idx), perforating every layer.
struct VerticalWell {
  int x_idx = 0;
  int y_idx = 0;
};

/// Horizontal bore from the heel (x, y) in metres, length l, azimuth theta in degrees measured
/// counter-clockwise from +x. The bore runs through the centre of `layer`.
struct HorizontalWell {
  double x = 0.0, y = 0.0;
  double l = 0.0;
  double theta = 0.0;
  int layer = 0;
};

/// Inclined bore. z is the heel depth below the reservoir top; phi is the dip below the
/// horizontal plane toward the toe, in degrees.
struct InclinedWell {
  double x = 0.0, y = 0.0, z = 0.0;
  double l = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

using WellShape = std::variant<VerticalWell, HorizontalWell, InclinedWell>;

enum class ShapeKind { Vertical, Horizontal, Inclined };

const char* to_string(ShapeKind kind);
ShapeKind shape_kind(const WellShape& shape);

struct WellSpec {
  WellRole role = WellRole::Producer;
  WellShape shape;
  std::string label;

  /// Drilled length that carries a per-metre cost; zero for vertical wells.
  double costed_length() const;
};

struct Perforation {
  CellIndex cell;
  double segment_length = 0.0;          // metres
  std::array<double, 3> direction{};    // unit vector, z positive downward
  double well_index = 0.0;              // m^3 / (day bar) per unit mobility (1/cp)
};

/// Heel point and unit direction of a horizontal/inclined bore, z downward from the top.
struct BoreLine {
  std::array<double, 3> heel{};
  std::array<double, 3> direction{};
  double length = 0.0;
};

BoreLine bore_line(const WellSpec& well, const GridGeometry& grid);

constexpr double kGrazingTolerance = 1.0e-9;  // metres

/// Cells crossed by the bore, ordered heel to toe. Vertical wells perforate their whole
/// column with length dz. Throws PathExitsGrid when any part of the bore leaves the grid.
std::vector<Perforation> trace_path(const WellSpec& well, const GridGeometry& grid);

/// Darcy unit conversion: mD * m^2 / (cp * m) * bar -> m^3/day.
/// 9.869233e-16 m^2/mD * 1e5 Pa/bar * 86400 s/day / 1e-3 Pa s/cp.
constexpr double kDarcyMetric = 8.52702e-3;

/// Peaceman index for a segment, projected onto the three cell axes and combined as the root
/// sum of squares. Throws DegenerateIndex if any contributing r_eq <= r_well.
double well_index(const Perforation& perf, const RockModel& rock, const GridGeometry& grid,
                  double r_well);

/// Equivalent radius and effective permeability for flow perpendicular to axis `axis`.
struct PeacemanTerms {
  double k_eff = 0.0;
  double r_eq = 0.0;
};
PeacemanTerms peaceman_terms(int axis, double kx, double ky, double kz, double dx, double dy,
                             double dz);

struct ConfigurationCheck {
  bool valid = true;
  std::string reason;
  explicit operator bool() const { return valid; }
};

/// Rejects configurations where two wells perforate the same cell, or a bore leaves the grid.
ConfigurationCheck validate_configuration(std::span<const WellSpec> wells,
                                          const GridGeometry& grid);

struct CompletedWell {
  WellSpec spec;
  std::vector<Perforation> perforations;
};

/// trace_path + well_index for every well.
std::vector<CompletedWell> complete_wells(std::span<const WellSpec> wells,
                                          const ReservoirModel& model, double r_well);

void write_perforations_csv(std::ostream& out, std::span<const CompletedWell> wells);

}  // namespace wellopt

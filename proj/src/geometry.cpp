#include "wellopt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "wellopt/errors.hpp"

namespace wellopt {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int start_index(double coord, double dir, double d, int n) {
  int c = static_cast<int>(std::floor(coord / d));
  // on a face while moving backwards: the bore lives in the lower cell
  if (dir < 0 && c * d == coord) --c;
  return std::clamp(c, 0, n - 1);
}

}  // namespace

const char* to_string(WellRole role) {
  return role == WellRole::Injector ? "injector" : "producer";
}

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Vertical:
      return "vertical";
    case ShapeKind::Horizontal:
      return "horizontal";
    case ShapeKind::Inclined:
      return "inclined";
  }
  return "?";
}

ShapeKind shape_kind(const WellShape& shape) {
  return static_cast<ShapeKind>(shape.index());
}

double WellSpec::costed_length() const {
  return std::visit(Overloaded{[](const VerticalWell&) { return 0.0; },
                               [](const HorizontalWell& w) { return w.l; },
                               [](const InclinedWell& w) { return w.l; }},
                    shape);
}

BoreLine bore_line(const WellSpec& well, const GridGeometry& grid) {
  return std::visit(
      Overloaded{
          [&](const VerticalWell& w) {
            return BoreLine{{(w.x_idx + 0.5) * grid.dx, (w.y_idx + 0.5) * grid.dy, 0.0},
                            {0.0, 0.0, 1.0},
                            grid.thickness()};
          },
          [&](const HorizontalWell& w) {
            const double th = w.theta * kDeg;
            return BoreLine{{w.x, w.y, (w.layer + 0.5) * grid.dz},
                            {std::cos(th), std::sin(th), 0.0},
                            w.l};
          },
          [&](const InclinedWell& w) {
            const double th = w.theta * kDeg;
            const double ph = w.phi * kDeg;
            return BoreLine{{w.x, w.y, w.z},
                            {std::cos(ph) * std::cos(th), std::cos(ph) * std::sin(th),
                             std::sin(ph)},
                            w.l};
          }},
      well.shape);
}

std::vector<Perforation> trace_path(const WellSpec& well, const GridGeometry& grid) {
  if (const auto* v = std::get_if<VerticalWell>(&well.shape)) {
    if (v->x_idx < 0 || v->x_idx >= grid.nx || v->y_idx < 0 || v->y_idx >= grid.ny)
      throw PathExitsGrid(fmt::format("vertical well {} at ({}, {}) is outside the grid",
                                      well.label, v->x_idx, v->y_idx));
    std::vector<Perforation> perfs;
    perfs.reserve(static_cast<std::size_t>(grid.nz));
    for (int k = 0; k < grid.nz; ++k)
      perfs.push_back({{v->x_idx, v->y_idx, k}, grid.dz, {0.0, 0.0, 1.0}, 0.0});
    return perfs;
  }

  const BoreLine line = bore_line(well, grid);
  const std::array<double, 3> extent{grid.length_x(), grid.length_y(), grid.thickness()};
  const std::array<double, 3> size{grid.dx, grid.dy, grid.dz};
  const std::array<int, 3> n{grid.nx, grid.ny, grid.nz};

  for (int a = 0; a < 3; ++a) {
    const double heel = line.heel[a];
    const double toe = heel + line.length * line.direction[a];
    if (heel < -kGrazingTolerance || heel > extent[a] + kGrazingTolerance ||
        toe < -kGrazingTolerance || toe > extent[a] + kGrazingTolerance)
      throw PathExitsGrid(fmt::format("well {} leaves the grid along axis {}", well.label, a));
  }

  // Amanatides-Woo traversal in the bore parameter t in [0, length].
  std::array<int, 3> cell{};
  std::array<int, 3> step{};
  std::array<double, 3> t_max{};
  std::array<double, 3> t_delta{};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double dir = line.direction[a];
    cell[a] = start_index(line.heel[a], dir, size[a], n[a]);
    if (dir > 0) {
      step[a] = 1;
      t_max[a] = ((cell[a] + 1) * size[a] - line.heel[a]) / dir;
      t_delta[a] = size[a] / dir;
    } else if (dir < 0) {
      step[a] = -1;
      t_max[a] = (cell[a] * size[a] - line.heel[a]) / dir;
      t_delta[a] = -size[a] / dir;
    } else {
      step[a] = 0;
      t_max[a] = kInf;
      t_delta[a] = kInf;
    }
  }

  std::vector<Perforation> perfs;
  double t = 0.0;
  double carried = 0.0;  // grazing length waiting for a home
  while (t < line.length) {
    const double t_next = std::min({t_max[0], t_max[1], t_max[2], line.length});
    const double seg = t_next - t;
    const bool inside = cell[0] >= 0 && cell[0] < n[0] && cell[1] >= 0 && cell[1] < n[1] &&
                        cell[2] >= 0 && cell[2] < n[2];
    if (seg > kGrazingTolerance && inside) {
      perfs.push_back({{cell[0], cell[1], cell[2]}, seg + carried, line.direction, 0.0});
      carried = 0.0;
    } else if (seg > kGrazingTolerance) {
      throw PathExitsGrid(fmt::format("well {} leaves the grid", well.label));
    } else if (!perfs.empty()) {
      perfs.back().segment_length += seg;
    } else {
      carried += seg;
    }
    if (t_next >= line.length) break;
    const int axis = static_cast<int>(std::min_element(t_max.begin(), t_max.end()) - t_max.begin());
    cell[axis] += step[axis];
    t_max[axis] += t_delta[axis];
    t = t_next;
  }
  if (perfs.empty())
    throw PathExitsGrid(fmt::format("well {} has no perforated length", well.label));
  return perfs;
}

PeacemanTerms peaceman_terms(int axis, double kx, double ky, double kz, double dx, double dy,
                             double dz) {
  // flow is perpendicular to the bore axis; (k1, d1), (k2, d2) span that plane
  double k1 = 0, k2 = 0, d1 = 0, d2 = 0;
  switch (axis) {
    case 0:
      k1 = ky, d1 = dy, k2 = kz, d2 = dz;
      break;
    case 1:
      k1 = kx, d1 = dx, k2 = kz, d2 = dz;
      break;
    default:
      k1 = kx, d1 = dx, k2 = ky, d2 = dy;
      break;
  }
  const double r21 = std::sqrt(k2 / k1);
  const double r12 = std::sqrt(k1 / k2);
  const double r_eq = 0.28 * std::sqrt(r21 * d1 * d1 + r12 * d2 * d2) /
                      (std::sqrt(r21) + std::sqrt(r12));
  return {std::sqrt(k1 * k2), r_eq};
}

double well_index(const Perforation& perf, const RockModel& rock, const GridGeometry& grid,
                  double r_well) {
  if (!(perf.segment_length > 0)) throw Error("perforation length must be > 0");
  if (!(r_well > 0)) throw Error("well radius must be > 0");
  const auto c = grid.linear(perf.cell);
  double sum_sq = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double len = perf.segment_length * std::abs(perf.direction[a]);
    if (len <= kGrazingTolerance) continue;
    const auto [k_eff, r_eq] = peaceman_terms(a, rock.perm_x[c], rock.perm_y[c], rock.perm_z[c],
                                              grid.dx, grid.dy, grid.dz);
    if (r_eq <= r_well)
      throw DegenerateIndex(fmt::format("r_eq {} <= r_well {} in cell ({}, {}, {})", r_eq, r_well,
                                        perf.cell.i, perf.cell.j, perf.cell.k));
    const double wi = kDarcyMetric * 2.0 * std::numbers::pi * k_eff * len / std::log(r_eq / r_well);
    sum_sq += wi * wi;
  }
  return std::sqrt(sum_sq);
}

ConfigurationCheck validate_configuration(std::span<const WellSpec> wells,
                                          const GridGeometry& grid) {
  std::map<CellIndex, std::size_t> owner;
  for (std::size_t w = 0; w < wells.size(); ++w) {
    std::vector<Perforation> perfs;
    try {
      perfs = trace_path(wells[w], grid);
    } catch (const PathExitsGrid& e) {
      return {false, e.what()};
    }
    for (const auto& p : perfs) {
      const auto [it, fresh] = owner.emplace(p.cell, w);
      if (!fresh && it->second != w)
        return {false, fmt::format("wells {} and {} share cell ({}, {}, {})",
                                   wells[it->second].label, wells[w].label, p.cell.i, p.cell.j,
                                   p.cell.k)};
    }
  }
  return {};
}

std::vector<CompletedWell> complete_wells(std::span<const WellSpec> wells,
                                          const ReservoirModel& model, double r_well) {
  std::vector<CompletedWell> out;
  out.reserve(wells.size());
  for (const auto& w : wells) {
    CompletedWell cw{w, trace_path(w, model.grid)};
    for (auto& p : cw.perforations) p.well_index = well_index(p, model.rock, model.grid, r_well);
    out.push_back(std::move(cw));
  }
  return out;
}

void write_perforations_csv(std::ostream& out, std::span<const CompletedWell> wells) {
  out << "well,role,i,j,k,segment_length,well_index\n";
  for (const auto& w : wells)
    for (const auto& p : w.perforations)
      out << fmt::format("{},{},{},{},{},{:.17g},{:.17g}\n", w.spec.label, to_string(w.spec.role),
                         p.cell.i, p.cell.j, p.cell.k, p.segment_length, p.well_index);
}

}  // namespace wellopt

#include "wellopt/reservoir.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "wellopt/errors.hpp"

namespace wellopt {

namespace {

constexpr double kGravity = 9.80665;  // m/s^2
constexpr double kPascalPerBar = 1.0e5;

void require(bool ok, const char* what) {
  if (!ok) throw Error(what);
}

// Sum over a clamped window [c - r, c + r] along one axis, in place. `counts` accumulates the
// product of window lengths so truncated edge windows can be rescaled.
void box_pass(std::vector<double>& values, std::vector<double>& counts, const GridGeometry& g,
              int axis, int radius) {
  if (radius <= 0) return;
  const std::array<int, 3> n{g.nx, g.ny, g.nz};
  std::vector<double> out(values.size(), 0.0);
  for (int k = 0; k < g.nz; ++k) {
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const std::array<int, 3> c{i, j, k};
        const int lo = std::max(0, c[axis] - radius);
        const int hi = std::min(n[axis] - 1, c[axis] + radius);
        double sum = 0.0;
        for (int m = lo; m <= hi; ++m) {
          std::array<int, 3> q = c;
          q[axis] = m;
          sum += values[g.linear({q[0], q[1], q[2]})];
        }
        const auto idx = g.linear({i, j, k});
        out[idx] = sum;
        counts[idx] *= hi - lo + 1;
      }
    }
  }
  values.swap(out);
}

}  // namespace

void GridGeometry::validate() const {
  require(nx >= 1 && ny >= 1 && nz >= 1, "grid cell counts must be >= 1");
  require(dx > 0 && dy > 0 && dz > 0, "grid cell sizes must be > 0");
}

CellIndex GridGeometry::cell(std::size_t linear_index) const {
  const auto sx = static_cast<std::size_t>(nx);
  const auto sy = static_cast<std::size_t>(ny);
  return {static_cast<int>(linear_index % sx), static_cast<int>((linear_index / sx) % sy),
          static_cast<int>(linear_index / (sx * sy))};
}

void RockModel::validate(const GridGeometry& grid) const {
  const auto n = grid.cell_count();
  require(perm_x.size() == n && perm_y.size() == n && perm_z.size() == n && porosity.size() == n,
          "rock arrays must match the cell count");
  for (std::size_t c = 0; c < n; ++c) {
    require(perm_x[c] > 0 && perm_y[c] > 0 && perm_z[c] > 0, "permeability must be > 0");
    require(porosity[c] > 0 && porosity[c] <= 1, "porosity must lie in (0, 1]");
  }
  require(compressibility >= 0, "rock compressibility must be >= 0");
}

void FluidModel::validate() const {
  require(rho_w > 0 && rho_o > 0, "densities must be > 0");
  require(mu_w > 0 && mu_o > 0, "viscosities must be > 0");
  require(c_w > 0 && c_o > 0, "compressibilities must be > 0");
  require(corey_nw > 0 && corey_no > 0, "Corey exponents must be > 0");
  require(swc > 0 && sor > 0 && swc + sor < 1, "need swc, sor > 0 and swc + sor < 1");
  require(krw_end > 0 && krw_end <= 1 && kro_end > 0 && kro_end <= 1,
          "relperm endpoints must lie in (0, 1]");
}

RelPerm relperm(double s_w, const FluidModel& f) {
  const double se = std::clamp((s_w - f.swc) / (1.0 - f.swc - f.sor), 0.0, 1.0);
  return {f.krw_end * std::pow(se, f.corey_nw), f.kro_end * std::pow(1.0 - se, f.corey_no)};
}

double total_mobility(double s_w, const FluidModel& f) {
  const RelPerm kr = relperm(s_w, f);
  return kr.krw / f.mu_w + kr.kro / f.mu_o;
}

double fractional_flow(double s_w, const FluidModel& f) {
  const RelPerm kr = relperm(s_w, f);
  const double lw = kr.krw / f.mu_w;
  return lw / (lw + kr.kro / f.mu_o);
}

double max_fractional_flow_slope(const FluidModel& f) {
  constexpr int kSamples = 2000;
  const double lo = f.swc;
  const double hi = 1.0 - f.sor;
  const double h = (hi - lo) / kSamples;
  double best = 0.0;
  double prev = fractional_flow(lo, f);
  for (int n = 1; n <= kSamples; ++n) {
    const double cur = fractional_flow(lo + n * h, f);
    best = std::max(best, (cur - prev) / h);
    prev = cur;
  }
  // sampled chords underestimate the peak slightly
  return 1.05 * best;
}

InitialState make_initial_state(const GridGeometry& grid, const FluidModel& fluids,
                                const InitialConditions& ic) {
  InitialState st;
  st.owc_depth = ic.owc_depth;
  const auto n = grid.cell_count();
  st.p_init.resize(n);
  st.s_w_init.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const int k = grid.cell(c).k;
    const double depth = grid.center_depth(k);
    const bool water = depth > ic.owc_depth;
    st.s_w_init[c] = water ? fluids.s_max() : ic.s_w_above;
    double p = ic.p_datum;
    if (ic.hydrostatic) {
      const double oil_column = std::max(0.0, std::min(depth, ic.owc_depth) - grid.depth_top);
      const double water_column = std::max(0.0, depth - std::max(ic.owc_depth, grid.depth_top));
      p += kGravity * (fluids.rho_o * oil_column + fluids.rho_w * water_column) / kPascalPerBar;
    }
    st.p_init[c] = p;
  }
  return st;
}

std::array<int, 3> smoothing_radius(const GridGeometry& grid, double correlation_length) {
  auto r = [&](double d) {
    return static_cast<int>(std::lround(correlation_length / (2.0 * d)));
  };
  return {r(grid.dx), r(grid.dy), r(grid.dz)};
}

RockModel generate_field(std::uint64_t seed, const GridGeometry& grid, const FieldParams& p) {
  grid.validate();
  require(p.log_stddev >= 0, "log_stddev must be >= 0");
  require(p.correlation_length > 0, "correlation_length must be > 0");
  require(p.kz_anisotropy > 0, "kz_anisotropy must be > 0");
  require(p.porosity_mean > 0 && p.porosity_mean <= 1, "porosity_mean must lie in (0, 1]");

  const auto n = grid.cell_count();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(n);
  for (auto& v : z) v = normal(rng);

  // Sums of iid N(0,1) over w cells have variance w, so dividing by sqrt(w) restores unit
  // marginal variance, including at edges where the window is truncated.
  std::vector<double> counts(n, 1.0);
  const auto radius = smoothing_radius(grid, p.correlation_length);
  for (int axis = 0; axis < 3; ++axis) box_pass(z, counts, grid, axis, radius[axis]);
  for (std::size_t c = 0; c < n; ++c) z[c] /= std::sqrt(counts[c]);

  RockModel rock;
  rock.perm_x.resize(n);
  rock.porosity.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    rock.perm_x[c] = std::exp(p.log_mean + p.log_stddev * z[c]);
    rock.porosity[c] = std::clamp(p.porosity_mean + p.porosity_stddev * z[c], 0.01, 1.0);
  }
  rock.perm_y = rock.perm_x;
  rock.perm_z = rock.perm_x;
  for (auto& k : rock.perm_z) k *= p.kz_anisotropy;
  return rock;
}

void ReservoirModel::validate() const {
  grid.validate();
  rock.validate(grid);
  fluids.validate();
  const auto n = grid.cell_count();
  require(initial.p_init.size() == n && initial.s_w_init.size() == n,
          "initial state arrays must match the cell count");
  for (double s : initial.s_w_init) require(s >= 0 && s <= 1, "initial saturation out of [0, 1]");
}

namespace {

const char* const kArrayNames[] = {"perm_x", "perm_y", "perm_z", "porosity"};

void write_le(std::ofstream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xffu);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_le(std::ifstream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw Error("field binary truncated");
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_rock(const std::filesystem::path& stem, const GridGeometry& grid, const RockModel& rock) {
  rock.validate(grid);
  auto bin_path = stem;
  bin_path += ".bin";
  auto json_path = stem;
  json_path += ".json";
  nlohmann::json header = {{"format", "wellopt-field"},
                           {"version", 1},
                           {"dtype", "<f8"},
                           {"nx", grid.nx},
                           {"ny", grid.ny},
                           {"nz", grid.nz},
                           {"order", "i-fastest"},
                           {"arrays", kArrayNames},
                           {"compressibility", rock.compressibility},
                           {"data", bin_path.filename().string()}};
  std::ofstream hj(json_path);
  if (!hj) throw Error("cannot write " + json_path.string());
  hj << header.dump(2) << '\n';

  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw Error("cannot write " + bin_path.string());
  for (const auto* arr : {&rock.perm_x, &rock.perm_y, &rock.perm_z, &rock.porosity})
    for (double v : *arr) write_le(out, v);
}

RockModel load_rock(const std::filesystem::path& stem, const GridGeometry& grid) {
  auto json_path = stem;
  json_path += ".json";
  std::ifstream hj(json_path);
  if (!hj) throw Error("cannot read " + json_path.string());
  const auto header = nlohmann::json::parse(hj);
  if (header.at("nx").get<int>() != grid.nx || header.at("ny").get<int>() != grid.ny ||
      header.at("nz").get<int>() != grid.nz)
    throw Error("field header dimensions do not match the grid");
  if (header.value("dtype", std::string{"<f8"}) != "<f8") throw Error("unsupported field dtype");

  const auto bin_path = json_path.parent_path() / header.at("data").get<std::string>();
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw Error("cannot read " + bin_path.string());
  RockModel rock;
  rock.compressibility = header.value("compressibility", 0.0);
  const auto n = grid.cell_count();
  for (auto* arr : {&rock.perm_x, &rock.perm_y, &rock.perm_z, &rock.porosity}) {
    arr->resize(n);
    for (auto& v : *arr) v = read_le(in);
  }
  rock.validate(grid);
  return rock;
}

}  // namespace wellopt

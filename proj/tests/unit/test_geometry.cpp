#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "support.hpp"
#include "wellopt/errors.hpp"
#include "wellopt/geometry.hpp"

using namespace wellopt;

namespace {

const GridGeometry kGrid{20, 15, 3, 40.0, 40.0, 25.0, 2000.0};

// Per-cell length by dense sampling of the segment midpoints.
std::map<CellIndex, double> sampled_lengths(std::array<double, 3> heel, std::array<double, 3> dir,
                                            double length, const GridGeometry& g) {
  std::map<CellIndex, double> out;
  const int n = 400000;
  const double ds = length / n;
  for (int s = 0; s < n; ++s) {
    const double t = (s + 0.5) * ds;
    const CellIndex c{static_cast<int>(std::floor((heel[0] + t * dir[0]) / g.dx)),
                      static_cast<int>(std::floor((heel[1] + t * dir[1]) / g.dy)),
                      static_cast<int>(std::floor((heel[2] + t * dir[2]) / g.dz))};
    out[c] += ds;
  }
  return out;
}

std::array<double, 3> inclined_dir(double theta_deg, double phi_deg) {
  const double th = theta_deg * std::numbers::pi / 180.0;
  const double ph = phi_deg * std::numbers::pi / 180.0;
  return {std::cos(ph) * std::cos(th), std::cos(ph) * std::sin(th), std::sin(ph)};
}

}  // namespace

TEST(TracePath, MatchesDenseSamplingForInclinedBore) {
  const InclinedWell w{113.0, 207.0, 31.0, 310.0, 37.0, 8.0};
  const auto perfs = trace_path({WellRole::Producer, w, "P1"}, kGrid);
  const auto oracle =
      sampled_lengths({w.x, w.y, w.z}, inclined_dir(w.theta, w.phi), w.l, kGrid);
  ASSERT_EQ(perfs.size(), oracle.size());
  for (const auto& p : perfs) {
    ASSERT_TRUE(oracle.contains(p.cell));
    EXPECT_NEAR(p.segment_length, oracle.at(p.cell), 2e-3);
  }
}

TEST(TracePath, MatchesDenseSamplingForHorizontalBore) {
  const HorizontalWell w{500.0, 90.0, 280.0, 160.0, 1};
  const auto perfs = trace_path({WellRole::Injector, w, "I1"}, kGrid);
  const auto oracle = sampled_lengths({w.x, w.y, 1.5 * kGrid.dz}, inclined_dir(w.theta, 0.0),
                                      w.l, kGrid);
  ASSERT_EQ(perfs.size(), oracle.size());
  for (const auto& p : perfs) {
    EXPECT_EQ(p.cell.k, 1);
    EXPECT_NEAR(p.segment_length, oracle.at(p.cell), 2e-3);
  }
}

TEST(TracePath, VerticalWellPerforatesWholeColumn) {
  const auto perfs = trace_path(fixtures::vertical(WellRole::Producer, 4, 7, "P1"), kGrid);
  ASSERT_EQ(perfs.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(perfs[k].cell, (CellIndex{4, 7, k}));
    EXPECT_DOUBLE_EQ(perfs[k].segment_length, 25.0);
  }
}

TEST(TracePath, AxisAlignedBoreAlongCellFaceHasNoGrazingSegments) {
  // heel exactly on a cell boundary in y, bore along +x
  const HorizontalWell w{0.0, 80.0, 200.0, 0.0, 0};
  const auto perfs = trace_path({WellRole::Producer, w, "P1"}, kGrid);
  ASSERT_EQ(perfs.size(), 5u);
  for (const auto& p : perfs) {
    EXPECT_GT(p.segment_length, kGrazingTolerance);
    EXPECT_EQ(p.cell.j, 2);
  }
}

TEST(TracePath, ThrowsWhenBoreLeavesGrid) {
  const HorizontalWell w{700.0, 300.0, 300.0, 0.0, 0};
  EXPECT_THROW(trace_path({WellRole::Producer, w, "P1"}, kGrid), PathExitsGrid);
  const InclinedWell deep{100.0, 100.0, 70.0, 300.0, 0.0, 10.0};
  EXPECT_THROW(trace_path({WellRole::Producer, deep, "P1"}, kGrid), PathExitsGrid);
}

TEST(TracePath, ThetaWrapsModulo360) {
  const InclinedWell a{400.0, 300.0, 20.0, 250.0, 10.0, 4.0};
  InclinedWell b = a;
  b.theta = 370.0;
  const auto pa = trace_path({WellRole::Producer, a, "P"}, kGrid);
  const auto pb = trace_path({WellRole::Producer, b, "P"}, kGrid);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].cell, pb[i].cell);
    EXPECT_NEAR(pa[i].segment_length, pb[i].segment_length, 1e-9);
  }
}

TEST(TracePathProperty, RandomInclinedBoresConserveLengthAndStayContiguous) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> ux(0.0, kGrid.length_x()), uy(0.0, kGrid.length_y()),
      uz(0.0, kGrid.thickness()), ul(100.0, 400.0), uth(0.0, 360.0), uph(0.0, 10.0);
  int traced = 0;
  for (int n = 0; n < 1000; ++n) {
    const InclinedWell w{ux(gen), uy(gen), uz(gen), ul(gen), uth(gen), uph(gen)};
    std::vector<Perforation> perfs;
    try {
      perfs = trace_path({WellRole::Producer, w, "P"}, kGrid);
    } catch (const PathExitsGrid&) {
      continue;
    }
    ++traced;
    double total = 0.0;
    for (std::size_t i = 0; i < perfs.size(); ++i) {
      total += perfs[i].segment_length;
      EXPECT_GT(perfs[i].segment_length, 0.0);
      EXPECT_TRUE(kGrid.contains(perfs[i].cell));
      if (i == 0) continue;
      const auto& a = perfs[i - 1].cell;
      const auto& b = perfs[i].cell;
      EXPECT_LE(std::abs(a.i - b.i), 1);
      EXPECT_LE(std::abs(a.j - b.j), 1);
      EXPECT_LE(std::abs(a.k - b.k), 1);
      EXPECT_NE(a, b);
    }
    EXPECT_NEAR(total, w.l, 1e-9 * w.l);
  }
  EXPECT_GT(traced, 100);
}

TEST(Peaceman, IsotropicVerticalIndexByHand) {
  const GridGeometry g{5, 5, 1, 120.0, 120.0, 10.0, 0.0};
  const auto rock = fixtures::uniform_rock(g, 100.0, 100.0, 0.2);
  Perforation p{{2, 2, 0}, 10.0, {0.0, 0.0, 1.0}, 0.0};
  // r_eq = 0.14 sqrt(dx^2 + dy^2) for equal horizontal permeabilities
  const double r_eq = 0.14 * std::sqrt(2.0) * 120.0;
  const double expected = 2.0 * std::numbers::pi * 8.52702e-3 * 100.0 * 10.0 / std::log(r_eq / 0.1);
  EXPECT_NEAR(well_index(p, rock, g, 0.1), expected, 1e-12 * expected);
}

TEST(Peaceman, AnisotropicHorizontalAlongXUsesYZPlane) {
  const auto t = peaceman_terms(0, 200.0, 50.0, 5.0, 40.0, 30.0, 10.0);
  const double r_eq = 0.28 * std::sqrt(std::sqrt(5.0 / 50.0) * 900.0 + std::sqrt(50.0 / 5.0) * 100.0) /
                      (std::pow(5.0 / 50.0, 0.25) + std::pow(50.0 / 5.0, 0.25));
  EXPECT_NEAR(t.r_eq, r_eq, 1e-12);
  EXPECT_NEAR(t.k_eff, std::sqrt(250.0), 1e-12);
}

TEST(Peaceman, DiagonalSegmentCombinesProjectionsInQuadrature) {
  const GridGeometry g{5, 5, 1, 100.0, 100.0, 10.0, 0.0};
  const auto rock = fixtures::uniform_rock(g, 80.0, 8.0, 0.2);
  const double c = std::sqrt(0.5);
  Perforation diag{{1, 1, 0}, 50.0, {c, c, 0.0}, 0.0};
  Perforation along_x{{1, 1, 0}, 50.0 * c, {1.0, 0.0, 0.0}, 0.0};
  Perforation along_y{{1, 1, 0}, 50.0 * c, {0.0, 1.0, 0.0}, 0.0};
  const double wx = well_index(along_x, rock, g, 0.1);
  const double wy = well_index(along_y, rock, g, 0.1);
  EXPECT_NEAR(well_index(diag, rock, g, 0.1), std::hypot(wx, wy), 1e-12 * wx);
}

TEST(Peaceman, ThrowsWhenEquivalentRadiusTooSmall) {
  const GridGeometry g{2, 2, 1, 0.5, 0.5, 1.0, 0.0};
  const auto rock = fixtures::uniform_rock(g, 100.0, 100.0, 0.2);
  Perforation p{{0, 0, 0}, 1.0, {0.0, 0.0, 1.0}, 0.0};
  EXPECT_THROW(well_index(p, rock, g, 0.1), DegenerateIndex);
}

TEST(ValidateConfiguration, RejectsSharedCellsAndAcceptsDisjointWells) {
  std::vector<WellSpec> wells{fixtures::vertical(WellRole::Injector, 3, 3, "I1"),
                              fixtures::vertical(WellRole::Producer, 3, 3, "P1")};
  EXPECT_FALSE(validate_configuration(wells, kGrid));
  wells[1] = fixtures::vertical(WellRole::Producer, 4, 3, "P1");
  EXPECT_TRUE(validate_configuration(wells, kGrid));
  // horizontal bore crossing the producer's column
  wells.push_back({WellRole::Producer, HorizontalWell{100.0, 140.0, 200.0, 0.0, 2}, "P2"});
  const auto check = validate_configuration(wells, kGrid);
  EXPECT_FALSE(check);
  EXPECT_NE(check.reason.find("share"), std::string::npos);
}

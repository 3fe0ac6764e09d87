#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "support.hpp"
#include "wellopt/errors.hpp"
#include "wellopt/reservoir.hpp"

using namespace wellopt;

TEST(RelPerm, EndPointsMatchCoreyParameters) {
  const FluidModel f;
  EXPECT_DOUBLE_EQ(relperm(f.swc, f).krw, 0.0);
  EXPECT_DOUBLE_EQ(relperm(f.swc, f).kro, f.kro_end);
  EXPECT_DOUBLE_EQ(relperm(f.s_max(), f).krw, f.krw_end);
  EXPECT_DOUBLE_EQ(relperm(f.s_max(), f).kro, 0.0);
  // midpoint of a quadratic Corey curve
  EXPECT_NEAR(relperm(0.5, f).krw, 0.6 * 0.25, 1e-15);
}

TEST(RelPermProperty, MonotoneOverSaturationSweep) {
  const FluidModel f;
  RelPerm prev = relperm(0.0, f);
  double fw_prev = fractional_flow(0.0, f);
  for (int i = 1; i <= 1000; ++i) {
    const double s = i / 1000.0;
    const auto kr = relperm(s, f);
    EXPECT_GE(kr.krw, prev.krw);
    EXPECT_LE(kr.kro, prev.kro);
    EXPECT_GE(kr.krw, 0.0);
    EXPECT_GE(kr.kro, 0.0);
    const double fw = fractional_flow(s, f);
    EXPECT_GE(fw, fw_prev - 1e-15);
    EXPECT_NEAR(fw, fixtures::corey_fw(s, f), 1e-12);
    prev = kr;
    fw_prev = fw;
  }
}

TEST(RelPerm, MaxFractionalFlowSlopeBoundsFiniteDifferences) {
  const FluidModel f;
  const double m = max_fractional_flow_slope(f);
  double fd_max = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double s = f.swc + (f.s_max() - f.swc) * i / 20000.0;
    fd_max = std::max(fd_max, (fixtures::corey_fw(s + 1e-7, f) - fixtures::corey_fw(s, f)) / 1e-7);
  }
  // a safe CFL bound: above the true peak, but not by much
  EXPECT_GE(m, fd_max);
  EXPECT_LE(m, 1.06 * fd_max);
}

TEST(Field, SameSeedSameFieldDifferentSeedDifferentField) {
  const GridGeometry g{12, 9, 2, 40.0, 40.0, 10.0, 0.0};
  const auto a = generate_field(5, g, {});
  const auto b = generate_field(5, g, {});
  const auto c = generate_field(6, g, {});
  EXPECT_EQ(a.perm_x, b.perm_x);
  EXPECT_NE(a.perm_x, c.perm_x);
  for (std::size_t i = 0; i < a.perm_x.size(); ++i) {
    EXPECT_GT(a.perm_x[i], 0.0);
    EXPECT_DOUBLE_EQ(a.perm_z[i], 0.1 * a.perm_x[i]);
  }
}

TEST(Field, LogPermeabilityHasRequestedMoments) {
  const GridGeometry g{80, 80, 1, 20.0, 20.0, 10.0, 0.0};
  FieldParams p;
  p.correlation_length = 60.0;
  const auto rock = generate_field(11, g, p);
  double mean = 0.0, sq = 0.0;
  for (double k : rock.perm_x) mean += std::log(k);
  mean /= rock.perm_x.size();
  for (double k : rock.perm_x) sq += std::pow(std::log(k) - mean, 2);
  const double sd = std::sqrt(sq / (rock.perm_x.size() - 1));
  EXPECT_NEAR(mean, p.log_mean, 0.15);
  EXPECT_NEAR(sd, p.log_stddev, 0.15);
}

TEST(Initial, HydrostaticPressureAndContact) {
  const GridGeometry g{1, 1, 3, 10.0, 10.0, 25.0, 2000.0};
  const FluidModel f;
  InitialConditions ic;
  ic.owc_depth = 2060.0;
  const auto st = make_initial_state(g, f, ic);
  EXPECT_DOUBLE_EQ(st.s_w_init[0], 0.2);
  EXPECT_DOUBLE_EQ(st.s_w_init[1], 0.2);
  EXPECT_DOUBLE_EQ(st.s_w_init[2], f.s_max());
  // layer 0 centre at 12.5 m of oil
  EXPECT_NEAR(st.p_init[0], 280.0 + 9.80665 * 860.0 * 12.5 / 1e5, 1e-9);
  // layer 2 centre: 60 m of oil then 2.5 m of water
  EXPECT_NEAR(st.p_init[2], 280.0 + 9.80665 * (860.0 * 60.0 + 1000.0 * 2.5) / 1e5, 1e-9);
}

TEST(Rock, SaveLoadRoundTrip) {
  const GridGeometry g{4, 3, 2, 10.0, 10.0, 5.0, 0.0};
  const auto rock = generate_field(2, g, {});
  const auto stem = std::filesystem::temp_directory_path() / "wellopt_rock_roundtrip";
  save_rock(stem, g, rock);
  const auto back = load_rock(stem, g);
  EXPECT_EQ(back.perm_x, rock.perm_x);
  EXPECT_EQ(back.perm_z, rock.perm_z);
  EXPECT_EQ(back.porosity, rock.porosity);
  const GridGeometry other{4, 3, 1, 10.0, 10.0, 5.0, 0.0};
  EXPECT_THROW(load_rock(stem, other), Error);
}

TEST(Grid, LinearIndexRoundTrip) {
  const GridGeometry g{7, 5, 3, 1.0, 1.0, 1.0, 0.0};
  for (std::size_t c = 0; c < g.cell_count(); ++c) EXPECT_EQ(g.linear(g.cell(c)), c);
  EXPECT_EQ(g.linear({1, 0, 0}), 1u);
  EXPECT_EQ(g.linear({0, 1, 0}), 7u);
  EXPECT_EQ(g.linear({0, 0, 1}), 35u);
}

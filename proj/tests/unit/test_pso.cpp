#include <gtest/gtest.h>

#include <cmath>

#include "wellopt/pso.hpp"

using namespace wellopt;

namespace {

EvaluationRecord record(Point x, double npv, double h = 0.0) {
  EvaluationRecord r;
  r.x = std::move(x);
  r.eval = Evaluation::ok(npv, h, 0.0);
  return r;
}

Evaluation sphere(std::span<const double> x) {
  double f = 0.0;
  for (double v : x) f += (v - 0.37) * (v - 0.37);
  return Evaluation::ok(-f, 0.0, 0.0);
}

}  // namespace

TEST(PsoUpdate, HandCaseClampsAndReflectsVelocity) {
  Particle p{{0.5}, {0.1}, record({0.7}, 1.0)};
  const Point g{0.9};
  const double one[] = {1.0};
  velocity_position_update(p, &g, 0.721, 1.193, 1.193, one, one);
  // 0.721*0.1 + 1.193*0.2 + 1.193*0.4 = 0.7879, overshoots the box, clamp then reflect at half speed
  const double v = 0.721 * 0.1 + 1.193 * (0.7 - 0.5) + 1.193 * (0.9 - 0.5);
  EXPECT_NEAR(v, 0.7879, 1e-12);
  EXPECT_NEAR(p.x[0], 1.0, 1e-12);
  EXPECT_NEAR(p.v[0], -0.5 * v, 1e-12);
}

TEST(PsoUpdate, UnclampedHandCase) {
  Particle p{{0.2}, {0.05}, record({0.3}, 1.0)};
  const Point g{0.25};
  const double r1[] = {0.5}, r2[] = {0.25};
  velocity_position_update(p, &g, 0.721, 1.193, 1.193, r1, r2);
  const double v = 0.721 * 0.05 + 1.193 * 0.5 * 0.1 + 1.193 * 0.25 * 0.05;
  EXPECT_NEAR(p.v[0], v, 1e-15);
  EXPECT_NEAR(p.x[0], 0.2 + v, 1e-15);
}

TEST(PsoUpdate, ZeroRandomsLeaveInertiaOnly) {
  Particle p{{0.4, 0.6}, {0.01, -0.02}, record({0.9, 0.1}, 1.0)};
  const Point g{0.0, 1.0};
  const double zero[] = {0.0, 0.0};
  velocity_position_update(p, &g, 0.721, 1.193, 1.193, zero, zero);
  EXPECT_DOUBLE_EQ(p.v[0], 0.721 * 0.01);
  EXPECT_DOUBLE_EQ(p.v[1], 0.721 * -0.02);
  EXPECT_DOUBLE_EQ(p.x[0], 0.4 + 0.721 * 0.01);
}

TEST(PsoUpdate, ConsensusStateDriftsByInertia) {
  Particle p{{0.3}, {0.02}, record({0.3}, 1.0)};
  const Point g{0.3};
  const double r[] = {0.77};
  velocity_position_update(p, &g, 0.721, 1.193, 1.193, r, r);
  EXPECT_DOUBLE_EQ(p.v[0], 0.721 * 0.02);
  EXPECT_DOUBLE_EQ(p.x[0], 0.3 + 0.721 * 0.02);
}

TEST(PsoRank, ThreeRules) {
  EXPECT_EQ(rank(record({0}, 0.0, 5.0), record({1}, 0.0, 3.0)).eval.h, 3.0);
  EXPECT_EQ(rank(record({0}, 1.0, 0.0), record({1}, 100.0, 2.0)).eval.npv, 1.0);
  EXPECT_EQ(rank(record({0}, 10.0), record({1}, 12.0)).eval.npv, 12.0);
  // ties keep the first argument
  EXPECT_EQ(rank(record({0}, 7.0), record({1}, 7.0)).x[0], 0.0);
}

TEST(PsoRun, StopsAfterExactlyStagnationIterationsOnConstantObjective) {
  FunctionBox box(3, [](std::span<const double>) { return Evaluation::ok(1.0, 0.0, 0.0); });
  Evaluator ev(box, 1000000);
  const auto r = pso_run(ev, 5);
  EXPECT_EQ(r.stop_reason, "stagnation");
  ASSERT_EQ(r.pso_log.size(), 101u);
  EXPECT_EQ(r.pso_log.back().iteration, 100);
}

TEST(PsoRun, SphereConvergesInMostSeeds) {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    FunctionBox box(2, sphere);
    Evaluator ev(box, 5000);
    const auto r = pso_run(ev, seed);
    ASSERT_TRUE(r.best);
    if (std::abs(r.best->x[0] - 0.37) < 1e-3 && std::abs(r.best->x[1] - 0.37) < 1e-3) ++hits;
  }
  EXPECT_GE(hits, 9);
}

TEST(PsoRunProperty, GlobalBestIsRankMaximumOfHistoryAndPositionsStayInBox) {
  FunctionBox box(4, [](std::span<const double> x) {
    const double g = x[0] + x[1] - 1.2;
    return Evaluation::ok(std::sin(6 * x[2]) + x[0], std::max(g, 0.0), 0.0);
  });
  Evaluator ev(box, 3000);
  const auto r = pso_run(ev, 9);
  ASSERT_TRUE(r.best);
  for (const auto& h : r.history) {
    for (double v : h.x) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    if (h.eval.valid()) {
      EXPECT_FALSE(better(h.eval, r.best->eval));
    }
  }
  for (std::size_t i = 1; i < r.pso_log.size(); ++i) {
    const auto& a = r.pso_log[i - 1];
    const auto& b = r.pso_log[i];
    if (a.best_h == 0.0) {
      EXPECT_EQ(b.best_h, 0.0);
      EXPECT_GE(b.best_npv, a.best_npv);
    } else {
      EXPECT_LE(b.best_h, a.best_h);
    }
  }
  EXPECT_LE(r.simulations, 3000);
}

TEST(PsoRun, FixedSeedRepeatsTrajectory) {
  FunctionBox box(3, sphere);
  Evaluator a(box, 1000), b(box, 1000);
  const auto ra = pso_run(a, 21);
  const auto rb = pso_run(b, 21);
  ASSERT_EQ(ra.history.size(), rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) EXPECT_EQ(ra.history[i].x, rb.history[i].x);
}

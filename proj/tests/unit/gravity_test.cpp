#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "rotodrum/errors.hpp"
#include "rotodrum/gravity.hpp"

namespace rotodrum {
namespace {

BouncePoints example_points() { return BouncePoints{Vec2(0.0, 1.0), Vec2(1.0, 0.0), 1.0, 1.0}; }

Vec2 on_circle(double angle) { return Vec2(std::cos(angle), std::sin(angle)); }

// The energy-balance polynomial written out before expansion.
double balance(double u, double delta, const BouncePoints& bp, bool at_p2) {
  const Vec2 at = at_p2 ? bp.p2 : bp.p1;
  const Vec2 prev = at_p2 ? bp.p1 : bp.p2;
  const double lambda = bp.slope();
  const double a = 1 + lambda * lambda;
  const double b = 2 * bp.omega * (at.y() - lambda * at.x());
  const double alpha = at.x() - prev.x();
  const double c = alpha * bp.g * bp.omega * at.x();
  const double d = alpha * alpha * bp.g * bp.g;
  const double one = 1 - u * delta;
  return 4 * one * one * (a * delta + b) + 4 * c * u * u * one - d * std::pow(u, 4) * delta;
}

TEST(Parabola, ThroughExamplePoints) {
  const Parabola p = parabola_through(Vec2(0, 1), Vec2(1, 0), 10.0, 1.0);
  EXPECT_NEAR(p.v0.y(), -9.95, 1e-14);
  const double t = p.t_flight;
  const Vec2 end = Vec2(0, 1) + p.v0 * t + Vec2(0, -0.5 * t * t);
  EXPECT_LT((end - Vec2(1, 0)).norm(), 1e-12);
}

TEST(Parabola, BallisticLimitFollowsChord) {
  const Parabola p = parabola_through(Vec2(0, 1), Vec2(1, 0), 3.0, 1e-12);
  EXPECT_NEAR(p.v0.y() / p.v0.x(), -1.0, 1e-12);
  EXPECT_THROW(parabola_through(Vec2(0.6, 0.8), Vec2(0.6, -0.8), 1.0, 1.0), Error);
  EXPECT_THROW(parabola_through(Vec2(0, 1), Vec2(1, 0), -3.0, 1.0), Error);
}

TEST(Parabola, StaysInside) {
  const Parabola fast = parabola_through(Vec2(0, 1), Vec2(1, 0), 50.0, 1.0);
  EXPECT_TRUE(stays_inside(Vec2(0, 1), fast.v0, fast.t_flight, 1.0));
  const Vec2 a(-0.6, -0.8), b(0.6, -0.8);
  const Parabola lob = parabola_through(a, b, 0.1, 1.0);
  EXPECT_FALSE(stays_inside(a, lob.v0, lob.t_flight, 1.0));
  const Parabola chord = parabola_through(a, b, 1.0, 0.0);
  EXPECT_TRUE(stays_inside(a, chord.v0, chord.t_flight, 0.0));
}

TEST(Expansion, LeadingTermsForExample) {
  const BouncePoints bp = example_points();
  EXPECT_NEAR(delta0(bp), -1.0, 1e-15);
  EXPECT_NEAR(delta2(bp, true), -0.5, 1e-15);
}

TEST(Expansion, LeadingTermsAgreeWithCoordinateForms) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    BouncePoints bp{on_circle(6.3 * rng.uniform()), on_circle(6.3 * rng.uniform()),
                    0.5 + rng.uniform(), 0.5 + rng.uniform()};
    const double dx = bp.p2.x() - bp.p1.x();
    const double dy = bp.p2.y() - bp.p1.y();
    if (std::abs(dx) < 1e-2) continue;
    const double q = dx * dx + dy * dy;
    const double cross = bp.p1.x() * bp.p2.y() - bp.p2.x() * bp.p1.y();
    EXPECT_NEAR(delta0(bp), 2 * bp.omega * cross * dx / q, 1e-9);
    EXPECT_NEAR(delta2(bp, true), -dx * dx * dx * bp.g * bp.omega * bp.p2.x() / q, 1e-9);
    EXPECT_NEAR(delta2(bp, false), dx * dx * dx * bp.g * bp.omega * bp.p1.x() / q, 1e-9);
  }
}

TEST(Expansion, RemainderIsThirdOrder) {
  const BouncePoints bp = example_points();
  double c[3];
  int i = 0;
  for (double w : {1e2, 1e3, 1e4}) {
    const double delta = bounce_delta(w, bp, true);
    c[i++] = std::abs(delta + 1.0 + 0.5 / (w * w)) * w * w * w;
  }
  const double mean = (c[0] + c[1] + c[2]) / 3;
  for (double x : c) EXPECT_NEAR(x / mean, 1.0, 0.2);
}

TEST(Expansion, RootSatisfiesUnexpandedBalance) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const BouncePoints bp{Vec2(-0.28, 0.96), Vec2(0.8, -0.6), 1.0 + rng.uniform(), 0.5 + rng.uniform()};
    const double w = 30 + 1000 * rng.uniform();
    for (bool at_p2 : {true, false}) {
      const double ws = at_p2 ? w : -w;
      const DeltaSolution s = solve_bounce_delta(ws, bp, at_p2);
      EXPECT_LE(std::abs(balance(1 / ws, s.delta, bp, at_p2)), 1e-11 * s.scale);
    }
  }
}

TEST(Vertical, ReflectionFormula) {
  const Vec2 v = vertical_bounce(Vec2(0, -5), 0.6, 1.0);
  EXPECT_EQ(v.x(), 0.0);
  EXPECT_NEAR(v.y(), 6.2, 1e-15);
  EXPECT_EQ(vertical_bounce(Vec2(0, -5), 0.6, 0.0).y(), 5.0);
}

TEST(Bounces, SymmetricPointsArePeriodic) {
  for (const BouncePoints& bp : {BouncePoints{Vec2(-0.6, -0.8), Vec2(0.6, -0.8), 1.0, 1.0},
                                 BouncePoints{Vec2(-0.8, 0.6), Vec2(0.8, 0.6), 1.0, 1.0}}) {
    const BounceSequence seq = iterate_bounces(bp, 100.0, 1000);
    ASSERT_EQ(seq.records.size(), 1000u);
    double acc = 0.0;
    for (std::size_t k = 2; k < seq.records.size(); ++k) {
      acc += (seq.records[k].v_pre - seq.records[k - 2].v_pre).norm();
      acc += (seq.records[k].v_post - seq.records[k - 2].v_post).norm();
    }
    EXPECT_LT(acc, 1e-9);
  }
}

TEST(Bounces, FrameEnergyAndKinematicsAtEveryReflection) {
  const BouncePoints bp = example_points();
  const BounceSequence seq = iterate_bounces(bp, 100.0, 2000);
  Vec2 launch = seq.v_initial;
  Vec2 from = bp.p1;
  for (const BounceRecord& r : seq.records) {
    const Vec2 at = r.k % 2 == 0 ? bp.p2 : bp.p1;
    const double t = (at.x() - from.x()) / launch.x();
    const Vec2 arrival = launch + Vec2(0, -bp.g * t);
    EXPECT_NEAR((arrival - r.v_pre).norm(), 0.0, 1e-9 * arrival.norm());
    const Vec2 wall = bp.omega * Vec2(-at.y(), at.x());
    const double in = (r.v_pre - wall).squaredNorm();
    const double out = (r.v_post - wall).squaredNorm();
    EXPECT_LE(std::abs(out - in), 1e-10 * in);
    launch = r.v_post;
    from = at;
  }
}

TEST(Bounces, DoubleStepIncrementMatchesGrowthConstant) {
  const BouncePoints bp = example_points();
  const BounceSequence seq = iterate_bounces(bp, 60.0, 400);
  const double c1 = growth_constant(bp);
  EXPECT_NEAR(c1, 0.5, 1e-15);
  for (std::size_t i = 2; i < seq.records.size(); i += 2) {
    const double v0 = std::abs(seq.records[i - 2].v_pre.x());
    const double v1 = std::abs(seq.records[i].v_pre.x());
    EXPECT_NEAR((v1 - v0) * v0 * v0 / c1, 1.0, 0.1);
  }
}

TEST(Bounces, EnergyGrowsLinearlyInTime) {
  const BouncePoints bp = example_points();
  const BounceSequence seq = iterate_bounces(bp, 100.0, 10000);
  const AsymptoticsFit fit = fit_asymptotics(seq.records, bp);
  EXPECT_NEAR(fit.energy_slope, 1.0, 0.05);
  EXPECT_NEAR(fit.cube_slope, 1.5 * fit.c1, 0.05 * 1.5 * fit.c1);
}

TEST(Bounces, Errors) {
  const BouncePoints bp = example_points();
  EXPECT_THROW(iterate_bounces(bp, 5.0, 10), Error);
  const BounceSequence few = iterate_bounces(bp, 100.0, 10);
  try {
    fit_asymptotics(few.records, bp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
  BouncePoints off = bp;
  off.p2 = Vec2(1.1, 0.0);
  EXPECT_THROW(off.validate(), Error);
}

TEST(Bounces, CsvHeader) {
  const BounceSequence seq = iterate_bounces(example_points(), 100.0, 2);
  std::ostringstream os;
  write_bounce_csv(os, seq.records);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "k,s_k,vx_pre,vy_pre,vx_post,vy_post,delta,residual,EK,EF_contact");
}

TEST(LambertianGravity, ZeroGravityRecoversKnudsenChord) {
  Rng rng(9);
  const EnergyTrace tr = lambertian_gravity_run(1.0, 1.0, 0.0, Vec2(0, -1), Vec2(0, 3), 200000, rng);
  // v* = sqrt(2 E^F + omega^2 rho^2) with E^F = |(-1, 3)|^2 / 2 - 1/2.
  const double v_star = std::sqrt(10.0);
  EXPECT_NEAR(tr.flight_times.mean(), std::numbers::pi / (2 * v_star), 0.02 * std::numbers::pi / (2 * v_star));
}

TEST(LambertianGravity, ReflectionsKeepFrameSpeed) {
  Rng rng(10);
  const EnergyTrace tr = lambertian_gravity_run(1.0, 1.0, 1.0, Vec2(0, -1), Vec2(0, 3), 20000, rng, true);
  EXPECT_EQ(tr.events, 20000u);
  EXPECT_LT(tr.max_speed_drift, 1e-12 * std::sqrt(2 * tr.max_ek + 1));
  EXPECT_GE(tr.max_ek, tr.initial_ek);
}

}  // namespace
}  // namespace rotodrum

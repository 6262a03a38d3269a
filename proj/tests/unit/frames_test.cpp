#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rotodrum/domain.hpp"
#include "rotodrum/errors.hpp"
#include "rotodrum/frames.hpp"
#include "rotodrum/random.hpp"
#include "test_util.hpp"

namespace rotodrum {
namespace {

using test::vec;

TEST(Frames, RotationOfHorizontalPlaneOnly) {
  const VecD x = vec({1.0, 0.0, 5.0});
  const VecD y = rotate_h(std::numbers::pi / 2, x);
  EXPECT_NEAR(y[0], 0.0, 1e-15);
  EXPECT_NEAR(y[1], 1.0, 1e-15);
  EXPECT_EQ(y[2], 5.0);
}

TEST(Frames, LOperatorIsQuarterTurnOfProjection) {
  const VecD l = l_op(vec({2.0, 3.0, 7.0}));
  EXPECT_EQ(l[0], -3.0);
  EXPECT_EQ(l[1], 2.0);
  EXPECT_EQ(l[2], 0.0);
}

TEST(Frames, RoundTripThroughRotatingFrame) {
  Rng rng(7);
  const FrameParams fp{1.3, 4};
  for (int trial = 0; trial < 200; ++trial) {
    VecD x(4), v(4);
    for (int k = 0; k < 4; ++k) {
      x[k] = rng.normal();
      v[k] = rng.normal();
    }
    const double t = 10.0 * rng.uniform();
    const Phasepoint f = to_frame_f(t, x, v, fp);
    const Phasepoint back = from_frame_f(t, f.x, f.v, fp);
    EXPECT_LT((back.x - x).norm(), 1e-12);
    EXPECT_LT((back.v - v).norm(), 1e-12);
  }
}

TEST(Frames, FrameVelocityMatchesFiniteDifference) {
  // x^F(t) = R(-omega t) x(t) along straight inertial motion.
  const FrameParams fp{0.7, 3};
  const VecD x0 = vec({0.3, -0.2, 0.1});
  const VecD v = vec({0.5, 0.4, -0.3});
  const double t = 1.1;
  const double h = 1e-6;
  auto xf = [&](double s) { return rotate_h(-fp.omega * s, x0 + s * v); };
  const VecD fd = (xf(t + h) - xf(t - h)) / (2 * h);
  const Phasepoint f = to_frame_f(t, x0 + t * v, v, fp);
  EXPECT_LT((fd - f.v).norm(), 1e-8);
}

TEST(Frames, EnergyOfBallAtRestOnAxis) {
  SystemState s;
  s.balls.push_back({BallSpec{2.0, 0.0}, vec({0.0, 0.0}), vec({0.0, 0.0})});
  const EnergyBreakdown e = energy_breakdown(s, FrameParams{1.0, 2});
  EXPECT_EQ(e.total_F, 0.0);
  EXPECT_EQ(e.kinetic_inertial, 0.0);
}

TEST(Frames, CorotatingBallHasNegativeEnergy) {
  // Ball carried with the drum: v = omega L(x), so v^F = 0 and E^F = -m omega^2 r^2 / 2.
  SystemState s;
  const VecD x = vec({0.6, 0.0});
  s.balls.push_back({BallSpec{1.0, 0.0}, x, 2.0 * l_op(x)});
  const EnergyBreakdown e = energy_breakdown(s, FrameParams{2.0, 2});
  EXPECT_NEAR(e.kinetic_F, 0.0, 1e-15);
  EXPECT_NEAR(e.total_F, -0.5 * 4.0 * 0.36, 1e-15);
  EXPECT_NEAR(e.kinetic_inertial, 0.5 * 1.44, 1e-15);
}

TEST(Frames, RejectsNegativeOmega) {
  try {
    FrameParams{-1.0, 2}.validate();
    FAIL() << "expected InvalidArgument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

}  // namespace
}  // namespace rotodrum

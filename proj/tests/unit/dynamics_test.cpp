#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "rotodrum/dynamics.hpp"
#include "rotodrum/errors.hpp"
#include "rotodrum/random.hpp"
#include "test_util.hpp"

namespace rotodrum {
namespace {

using test::vec;

SystemState three_balls() {
  SystemState s;
  s.balls = {{{1.0, 0.1}, vec({-0.4, 0.1}), vec({0.7, 0.3})},
             {{2.0, 0.1}, vec({0.3, -0.2}), vec({-0.2, 0.9})},
             {{3.0, 0.1}, vec({0.1, 0.5}), vec({0.4, -0.6})}};
  return s;
}

TEST(PairCollision, HeadOn) {
  const auto t = time_to_pair_collision(vec({-1, 0}), vec({1, 0}), 0.1, vec({1, 0}), vec({-1, 0}), 0.1);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, 0.9, 1e-15);
}

TEST(PairCollision, ParallelAndReceding) {
  EXPECT_FALSE(time_to_pair_collision(vec({-1, 0}), vec({1, 1}), 0.1, vec({1, 0}), vec({1, 1}), 0.1));
  EXPECT_FALSE(time_to_pair_collision(vec({-1, 0}), vec({-1, 0}), 0.1, vec({1, 0}), vec({1, 0}), 0.1));
  EXPECT_FALSE(time_to_pair_collision(vec({-1, 0}), vec({1, 0}), 0.1, vec({1, 0.5}), vec({-1, 0}), 0.1));
}

TEST(WallTime, DiscExamples) {
  const Domain disc(Disc2D{1.0});
  EXPECT_NEAR(time_to_wall(disc, vec({0, 0}), vec({1, 0}), 0.0, 0.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(time_to_wall(disc, vec({0, 0}), vec({1, 0}), 0.2, 0.0, 1.0), 0.8, 1e-15);
  EXPECT_NEAR(time_to_wall(disc, vec({0, 0.5}), vec({1, 0}), 0.0, 0.0, 1.0), std::sqrt(0.75), 1e-15);
}

TEST(WallTime, CylinderCapsAndTorusAxis) {
  const Domain cyl(CylinderFinite{1.0, 0.5, 3});
  EXPECT_NEAR(time_to_wall(cyl, vec({0, 0, 0}), vec({0, 0, 2}), 0.1, 0.0, 1.0), 0.2, 1e-15);
  const Domain torus(CylinderTorus{1.0, 3});
  EXPECT_TRUE(std::isinf(time_to_wall(torus, vec({0, 0, 0}), vec({0, 0, 2}), 0.0, 0.0, 1.0)));
}

TEST(WallTime, StarDrumHitLiesOnMovingBoundary) {
  const Domain star(StarShaped2D{{1.0, 0.0, 0.0, 0.15}, {}});
  const double omega = 1.3;
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const VecD x = vec({0.3 * rng.uniform(), 0.3 * rng.uniform()});
    const double a = 2 * std::numbers::pi * rng.uniform();
    const VecD v = vec({std::cos(a), std::sin(a)});
    const double t0 = rng.uniform();
    const double dt = time_to_wall(star, x, v, 0.0, t0, omega);
    const VecD hit = rotate_h(-omega * (t0 + dt), x + dt * v);
    EXPECT_NEAR(hit.norm(), star.star().radius(std::atan2(hit[1], hit[0])), 1e-9);
  }
}

TEST(BallBall, EqualMassHeadOnSwaps) {
  const auto [vi, vj] = resolve_ball_ball(vec({0, 0}), vec({1, 0.5}), 1.0, vec({0.2, 0}), vec({-2, 0.25}), 1.0, 0.2);
  EXPECT_NEAR(vi[0], -2.0, 1e-15);
  EXPECT_NEAR(vj[0], 1.0, 1e-15);
  EXPECT_EQ(vi[1], 0.5);
  EXPECT_EQ(vj[1], 0.25);
}

TEST(BallBall, GlancingRightAngleSplit) {
  const double c = 0.2 / std::sqrt(2.0);
  const auto [vi, vj] = resolve_ball_ball(vec({0, 0}), vec({1, 0}), 1.0, vec({c, c}), vec({0, 0}), 1.0, 0.2);
  EXPECT_NEAR(vi[0], 0.5, 1e-15);
  EXPECT_NEAR(vi[1], -0.5, 1e-15);
  EXPECT_NEAR(vj[0], 0.5, 1e-15);
  EXPECT_NEAR(vj[1], 0.5, 1e-15);
  EXPECT_NEAR(vi.dot(vj), 0.0, 1e-15);
}

TEST(BallBall, Errors) {
  EXPECT_THROW(resolve_ball_ball(vec({0, 0}), vec({1, 0}), 1, vec({0.5, 0}), vec({0, 0}), 1, 0.2), Error);
  try {
    resolve_ball_ball(vec({0, 0}), vec({-1, 0}), 1, vec({0.2, 0}), vec({0, 0}), 1, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotApproaching);
  }
}

// Independent route: the 2x2 map on mass-weighted frame-F parallel components.
TEST(BallBall, RandomCollisionsSatisfyFrameRelation) {
  Rng rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const int d = 2 + trial % 3;
    const double omega = 2 * rng.uniform();
    const double mi = 0.1 + 3 * rng.uniform();
    const double mj = 0.1 + 3 * rng.uniform();
    VecD xi(d), e(d), vi(d), vj(d);
    for (int k = 0; k < d; ++k) {
      xi[k] = rng.uniform() - 0.5;
      e[k] = rng.normal();
      vi[k] = rng.normal();
      vj[k] = rng.normal();
    }
    e.normalize();
    if ((vj - vi).dot(e) > 0) vj -= 2 * (vj - vi).dot(e) * e;
    if ((vj - vi).dot(e) > -1e-3) continue;
    const double reach = 0.15;
    const VecD xj = xi + reach * e;
    const auto [wi, wj] = resolve_ball_ball(xi, vi, mi, xj, vj, mj, reach);

    const VecD p0 = mi * vi + mj * vj;
    const VecD p1 = mi * wi + mj * wj;
    EXPECT_LE((p1 - p0).norm(), 1e-12 * (mi * vi.norm() + mj * vj.norm()));
    const double k0 = 0.5 * (mi * vi.squaredNorm() + mj * vj.squaredNorm());
    const double k1 = 0.5 * (mi * wi.squaredNorm() + mj * wj.squaredNorm());
    EXPECT_LE(std::abs(k1 - k0), 1e-12 * k0);

    auto par = [&](const VecD& x, const VecD& v) { return (v - omega * l_op(x)).dot(e); };
    const double M = mi + mj;
    const double a = 2 * std::sqrt(mi * mj) / M;
    const double si = std::sqrt(mi), sj = std::sqrt(mj);
    const double in_j = sj * par(xj, vj), in_i = si * par(xi, vi);
    const double out_i = a * in_j + (mi - mj) / M * in_i;
    const double out_j = (mj - mi) / M * in_j + a * in_i;
    const double scale = 1 + std::abs(in_i) + std::abs(in_j);
    EXPECT_NEAR(si * par(xi, wi), out_i, 1e-12 * scale);
    EXPECT_NEAR(sj * par(xj, wj), out_j, 1e-12 * scale);
    EXPECT_NEAR(l_op(xj - xi).dot(e), 0.0, 1e-15);
  }
}

TEST(Specular, StaticDisc) {
  const Domain disc(Disc2D{1.0});
  const VecD r = resolve_wall_specular(disc, vec({1, 0}), vec({2, 0}), 0.0, 0.0, 0.0);
  EXPECT_NEAR(r[0], -2.0, 1e-15);
  EXPECT_NEAR(r[1], 0.0, 1e-15);
  const VecD x = vec({std::sqrt(0.5), std::sqrt(0.5)});
  const VecD v = vec({1.0, 0.2});
  const VecD w = resolve_wall_specular(disc, x, v, 0.0, 0.0, 0.0);
  const VecD n = -x;
  EXPECT_NEAR(w.dot(n), -v.dot(n), 1e-15);
  EXPECT_NEAR(w.norm(), v.norm(), 1e-15);
}

TEST(Specular, RotatingDiscKeepsFrameSpeed) {
  const Domain disc(Disc2D{1.0});
  const double omega = 1.0;
  const VecD x = vec({0.0, 1.0});
  const VecD v = vec({-0.9, 0.1});
  const VecD w = resolve_wall_specular(disc, x, v, 2.0, omega, 0.0);
  EXPECT_NEAR((w - omega * l_op(x)).norm(), (v - omega * l_op(x)).norm(), 1e-12);
  EXPECT_THROW(resolve_wall_specular(disc, x, vec({0.0, -1.0}), 0.0, omega, 0.0), Error);
}

TEST(Advance, SingleBallStaticDiscKeepsKineticEnergy) {
  SystemState s;
  s.balls = {{{1.0, 0.0}, vec({0.1, 0.2}), vec({0.8, -0.3})}};
  SpecularLaw law;
  AdvanceOptions opt;
  opt.max_events = 1000;
  const auto r = advance(s, Domain(Disc2D{}), FrameParams{0.0, 2}, 1e9, law, opt);
  EXPECT_EQ(r.events, 1000u);
  for (const auto& e : r.log.entries()) EXPECT_NEAR(e.ek_post, e.ek_pre, 1e-13);
}

TEST(Advance, ThreeBallsConserveFrameEnergyAndRespectBound) {
  const Domain disc(Disc2D{1.0});
  const FrameParams fp{1.0, 2};
  SpecularLaw law;
  AdvanceOptions opt;
  opt.max_events = 10000;
  const SystemState s = three_balls();
  const auto r = advance(s, disc, fp, 1e9, law, opt);
  EXPECT_EQ(r.events, 10000u);
  EXPECT_LT(r.log.max_relative_ef_drift(), 1e-9);
  EXPECT_LE(r.log.max_ek(), no_fermi_bound(s, disc, fp) + 1e-9);
}

SystemState reverse_run(const SystemState& s, std::size_t events) {
  const Domain disc(Disc2D{1.0});
  const FrameParams fp{1.0, 2};
  SpecularLaw law;
  AdvanceOptions opt;
  opt.max_events = events;
  opt.nudge = 0.0;
  const auto fwd = advance(s, disc, fp, 1e9, law, opt);
  SystemState back = fwd.state;
  for (Ball& b : back.balls) b.v = -b.v;
  back.time = 0.0;
  AdvanceOptions open;
  open.nudge = 0.0;
  return advance(back, disc, fp, fwd.state.time, law, open).state;
}

TEST(Advance, TimeReversalRetracesWallEvents) {
  SystemState s;
  s.balls = {{{1.0, 0.1}, vec({-0.4, 0.1}), vec({0.7, 0.3})}};
  const SystemState r = reverse_run(s, 300);
  EXPECT_LT((r.balls[0].x - s.balls[0].x).norm(), 1e-6);
  EXPECT_LT((r.balls[0].v + s.balls[0].v).norm(), 1e-6);
}

// Every ball-ball collision amplifies rounding errors by roughly the free path
// over the radius, so the mixed run is kept short.
TEST(Advance, TimeReversalRetracesMixedEvents) {
  SystemState s;
  s.balls = {{{1.0, 0.02}, vec({-0.4, 0.1}), vec({0.7, 0.3})},
             {{2.0, 0.02}, vec({0.3, -0.2}), vec({-0.2, 0.9})}};
  const SystemState r = reverse_run(s, 50);
  for (std::size_t i = 0; i < s.balls.size(); ++i) {
    EXPECT_LT((r.balls[i].x - s.balls[i].x).norm(), 1e-6);
    EXPECT_LT((r.balls[i].v + s.balls[i].v).norm(), 1e-6);
  }
}

TEST(Advance, SimultaneousWallHitsAbort) {
  SystemState s;
  s.balls = {{{1.0, 0.1}, vec({-0.5, 0.3}), vec({-1, 0})}, {{1.0, 0.1}, vec({0.5, 0.3}), vec({1, 0})}};
  SpecularLaw law;
  const Domain disc(Disc2D{1.0});
  try {
    advance(s, disc, FrameParams{1.0, 2}, 10.0, law);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SimultaneousCollision);
  }
  Rng rng(1);
  EXPECT_NO_THROW(advance(perturb_state(s, rng), disc, FrameParams{1.0, 2}, 10.0, law));
}

TEST(Advance, TorusPairMeetsAcrossIdentification) {
  SystemState s;
  s.balls = {{{1.0, 0.05}, vec({0, 0, 0.9}), vec({0, 0, 1})}, {{1.0, 0.05}, vec({0, 0, -0.9}), vec({0, 0, -1})}};
  SpecularLaw law;
  AdvanceOptions opt;
  opt.max_events = 1;
  Event first;
  opt.on_event = [&](const Event& e, const SystemState&) { first = e; };
  const auto r = advance(s, Domain(CylinderTorus{1.0, 3}), FrameParams{1.0, 3}, 10.0, law, opt);
  EXPECT_EQ(first.kind, EventKind::BallBall);
  EXPECT_NEAR(first.time, 0.05, 1e-12);
  EXPECT_LT(r.state.balls[0].v[2], 0.0);
}

TEST(Advance, StarDrumConservesFrameEnergy) {
  const Domain star(StarShaped2D{{1.0, 0.0, 0.1}, {0.0, 0.05}});
  SystemState s;
  s.balls = {{{1.0, 0.05}, vec({0.1, 0.0}), vec({0.5, 0.8})}};
  SpecularLaw law;
  AdvanceOptions opt;
  opt.max_events = 2000;
  const auto r = advance(s, star, FrameParams{0.7, 2}, 1e9, law, opt);
  EXPECT_EQ(r.events, 2000u);
  EXPECT_LT(r.log.max_relative_ef_drift(), 1e-9);
}

TEST(CollisionLog, CsvColumns) {
  SpecularLaw law;
  AdvanceOptions opt;
  opt.max_events = 3;
  const auto r = advance(three_balls(), Domain(Disc2D{}), FrameParams{1.0, 2}, 1e9, law, opt);
  std::ostringstream os;
  r.log.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "event_index,time,kind,i,j,EF_pre,EF_post,EK_pre,EK_post");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

}  // namespace
}  // namespace rotodrum

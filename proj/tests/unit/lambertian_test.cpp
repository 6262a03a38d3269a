#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rotodrum/errors.hpp"
#include "rotodrum/lambertian.hpp"
#include "rotodrum/stats.hpp"
#include "test_util.hpp"

namespace rotodrum {
namespace {

using test::vec;

VecD random_unit(int d, Rng& rng) {
  VecD n(d);
  for (int k = 0; k < d; ++k) n[k] = rng.normal();
  return n.normalized();
}

TEST(CosineSampler, PlanarAngleCdf) {
  Rng rng(1);
  const VecD n = vec({0.6, 0.8});
  const VecD t = vec({-0.8, 0.6});
  std::vector<double> theta(200000);
  for (double& a : theta) {
    const VecD w = sample_cosine_direction(n, 2, rng).direction;
    a = std::atan2(w.dot(t), w.dot(n));
  }
  EXPECT_LT(ks_one_sample(theta, [](double a) { return cosine_law_angle_cdf(a, 2); }), 0.005);
}

TEST(CosineSampler, MeanCosineInThreeDimensions) {
  Rng rng(2);
  RunningStats c;
  for (int i = 0; i < 200000; ++i) {
    c.add(sample_cosine_direction(vec({0, 0, 1}), 3, rng).direction[2]);
  }
  EXPECT_NEAR(c.mean(), 2.0 / 3.0, 0.003);
}

TEST(CosineSampler, ChiSquareAgainstBinnedDensity) {
  // d = 4: the polar angle has density (d-1) sin^(d-2) cos on [0, pi/2].
  Rng rng(3);
  const int d = 4;
  const int bins = 20;
  const int n = 200000;
  std::vector<int> counts(bins, 0);
  const VecD normal = random_unit(d, rng);
  for (int i = 0; i < n; ++i) {
    const double c = sample_cosine_direction(normal, d, rng).direction.dot(normal);
    const double th = std::acos(std::clamp(c, -1.0, 1.0));
    ++counts[std::min(bins - 1, static_cast<int>(th / (std::numbers::pi / 2) * bins))];
  }
  double chi2 = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = b * std::numbers::pi / 2 / bins;
    const double hi = (b + 1) * std::numbers::pi / 2 / bins;
    const double expected = n * (std::pow(std::sin(hi), d - 1) - std::pow(std::sin(lo), d - 1));
    chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
  }
  // 19 degrees of freedom; 43.8 is the 0.001 upper quantile.
  EXPECT_LT(chi2, 43.8);
}

TEST(CosineSampler, AlwaysInsideHemisphere) {
  Rng rng(4);
  for (int d = 2; d <= 8; ++d) {
    for (int i = 0; i < 5000; ++i) {
      const VecD n = random_unit(d, rng);
      const VecD w = sample_cosine_direction(n, d, rng).direction;
      EXPECT_GT(w.dot(n), 0.0);
      EXPECT_NEAR(w.norm(), 1.0, 1e-14);
    }
  }
}

TEST(LambertianReflection, StaticWallKeepsSpeed) {
  Rng rng(5);
  const Domain disc(Disc2D{1.0});
  const VecD v = vec({0.3, 0.4});
  const VecD w = reflect_lambertian(disc, vec({0.6, 0.8}), v, 0.0, FrameParams{0.0, 2}, rng);
  EXPECT_NEAR(w.norm(), 0.5, 1e-15);
  EXPECT_LT(w.dot(vec({0.6, 0.8})), 0.0);
}

TEST(LambertianReflection, RotatingWallKeepsFrameSpeed) {
  Rng rng(6);
  const Domain disc(Disc2D{1.0});
  const FrameParams fp{1.0, 2};
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double a = 2 * std::numbers::pi * rng.uniform();
    const VecD x = vec({std::cos(a), std::sin(a)});
    VecD u = vec({rng.normal(), rng.normal()});
    if (u.dot(x) < 0) u = -u;
    const VecD v = u + l_op(x);
    const VecD w = reflect_lambertian(disc, x, v, 0.0, fp, rng);
    const VecD uw = w - l_op(x);
    worst = std::max(worst, std::abs(uw.norm() - u.norm()) / u.norm());
    ASSERT_LT(uw.dot(x), 0.0);
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(LambertianReflection, FixedPointReproducesCosineLawInFrameF) {
  Rng rng(7);
  const Domain disc(Disc2D{1.0});
  const FrameParams fp{1.0, 2};
  const VecD x = vec({0.0, 1.0});
  const VecD v = vec({0.2, 0.9}) + l_op(x);
  std::vector<double> theta(200000);
  for (double& a : theta) {
    const VecD u = reflect_lambertian(disc, x, v, 0.0, fp, rng) - l_op(x);
    a = std::atan2(u[0], -u[1]);  // angle from the inward normal (0, -1)
  }
  EXPECT_LT(ks_one_sample(theta, [](double a) { return cosine_law_angle_cdf(a, 2); }), 0.005);
}

TEST(LambertianReflection, OffBoundaryThrows) {
  Rng rng(8);
  EXPECT_THROW(reflect_lambertian(Domain(Disc2D{}), vec({0.5, 0.0}), vec({1, 0}), 0.0, FrameParams{1.0, 2}, rng),
               Error);
}

TEST(CosineLawCdf, Endpoints) {
  EXPECT_NEAR(cosine_law_angle_cdf(-std::numbers::pi / 2, 2), 0.0, 1e-15);
  EXPECT_NEAR(cosine_law_angle_cdf(0.0, 2), 0.5, 1e-15);
  EXPECT_NEAR(cosine_law_angle_cdf(std::numbers::pi / 2, 5), 1.0, 1e-15);
}

}  // namespace
}  // namespace rotodrum

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <vector>

#include "rotodrum/polynomial.hpp"
#include "rotodrum/random.hpp"

namespace rotodrum {
namespace {

TEST(Polynomial, Horner) {
  const std::array<double, 4> c{2.0, -3.0, 0.0, 5.0};
  EXPECT_EQ(polyval(c, 2.0), 9.0);
}

TEST(Polynomial, CubicThreeRealRoots) {
  // (t - 1)(t + 2)(t - 3) = t^3 - 2t^2 - 5t + 6
  const auto r = cubic_real_roots(1.0, -2.0, -5.0, 6.0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], -2.0, 1e-13);
  EXPECT_NEAR(r[1], 1.0, 1e-13);
  EXPECT_NEAR(r[2], 3.0, 1e-13);
}

TEST(Polynomial, CubicOneRealRoot) {
  const auto r = cubic_real_roots(1.0, 0.0, 1.0, -2.0);  // (t-1)(t^2+t+2)
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 1.0, 1e-14);
}

TEST(Polynomial, DegenerateLeadingCoefficient) {
  const auto q = cubic_real_roots(0.0, 1.0, 0.0, -4.0);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_NEAR(q[0], -2.0, 1e-14);
  const auto l = cubic_real_roots(0.0, 0.0, 2.0, -1.0);
  ASSERT_EQ(l.size(), 1u);
  EXPECT_EQ(l[0], 0.5);
}

TEST(Polynomial, CompanionAgreesWithClosedForm) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::array<double, 3> roots{};
    for (double& x : roots) x = 4 * rng.uniform() - 2;
    std::sort(roots.begin(), roots.end());
    if (roots[1] - roots[0] < 1e-3 || roots[2] - roots[1] < 1e-3) continue;
    const double a = 1.0;
    const double b = -(roots[0] + roots[1] + roots[2]);
    const double c = roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2];
    const double d = -roots[0] * roots[1] * roots[2];
    const auto closed = cubic_real_roots(a, b, c, d);
    const std::array<double, 4> coeffs{a, b, c, d};
    const auto eig = companion_real_roots(coeffs);
    ASSERT_EQ(closed.size(), 3u);
    ASSERT_EQ(eig.size(), 3u);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(closed[i], roots[i], 1e-10);
      EXPECT_NEAR(eig[i], roots[i], 1e-10);
    }
  }
}

TEST(Polynomial, CompanionQuartic) {
  // (t^2 - 1)(t^2 + 1)
  const std::array<double, 5> c{1.0, 0.0, 0.0, 0.0, -1.0};
  const auto r = companion_real_roots(c);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], -1.0, 1e-13);
  EXPECT_NEAR(r[1], 1.0, 1e-13);
}

}  // namespace
}  // namespace rotodrum

#include "rotodrum/lambertian.hpp"

#include <cmath>
#include <numbers>

#include "rotodrum/errors.hpp"

namespace rotodrum {

HemisphereSample sample_cosine_direction(const VecD& normal, int d, Rng& rng) {
  if (d < 2 || normal.size() != d) {
    throw Error(ErrorCode::InvalidArgument, "normal dimension mismatch");
  }
  // Uniform point in the unit (d-1)-ball of the tangent hyperplane: isotropic
  // tangent direction times U^(1/(d-1)).
  VecD tangent(d);
  double norm = 0.0;
  do {
    for (int k = 0; k < d; ++k) tangent[k] = rng.normal();
    tangent -= tangent.dot(normal) * normal;
    norm = tangent.norm();
  } while (norm < 1e-300);
  const double radius = std::pow(rng.uniform(), 1.0 / (d - 1));
  tangent *= radius / norm;
  const double up = std::sqrt(std::max(0.0, 1.0 - radius * radius));
  HemisphereSample s;
  s.direction = tangent + up * normal;
  if (up <= 0.0) {
    // Measure-zero boundary case; redraw to keep the strict hemisphere.
    return sample_cosine_direction(normal, d, rng);
  }
  s.direction.normalize();
  return s;
}

VecD lambertian_about(const WallContact& contact, const VecD& x, const VecD& v, double omega,
                      Rng& rng) {
  const VecD u = relative_velocity(x, v, omega);
  const double speed = u.norm();
  const auto d = static_cast<int>(x.size());
  VecD out = speed * sample_cosine_direction(contact.inward_normal, d, rng).direction;
  out[0] -= omega * x[1];
  out[1] += omega * x[0];
  return out;
}

VecD reflect_lambertian(const Domain& dom, const VecD& x, const VecD& v, double t,
                        const FrameParams& fp, Rng& rng, double ball_radius) {
  return lambertian_about(wall_point_and_normal(dom, x, t, fp.omega, ball_radius), x, v,
                          fp.omega, rng);
}

VecD LambertianLaw::reflect(const Domain& /*dom*/, const WallContact& contact, const VecD& x,
                            const VecD& v, double /*t*/, double omega) {
  return lambertian_about(contact, x, v, omega, rng_);
}

VecD MixedLaw::reflect(const Domain& /*dom*/, const WallContact& contact, const VecD& x,
                       const VecD& v, double /*t*/, double omega) {
  const bool random = contact.face == kLateralFace ? lateral_ : caps_;
  return random ? lambertian_about(contact, x, v, omega, rng_)
                : specular_about(contact, x, v, omega);
}

double cosine_law_angle_cdf(double theta, int d) {
  if (d == 2) {
    if (theta <= -std::numbers::pi / 2) return 0.0;
    if (theta >= std::numbers::pi / 2) return 1.0;
    return 0.5 * (std::sin(theta) + 1.0);
  }
  if (theta <= 0.0) return 0.0;
  if (theta >= std::numbers::pi / 2) return 1.0;
  return std::pow(std::sin(theta), d - 1);
}

}  // namespace rotodrum

#pragma once

#include "rotodrum/dynamics.hpp"
#include "rotodrum/random.hpp"

namespace rotodrum {

struct HemisphereSample {
  VecD direction;  // unit, <direction, normal> > 0
};

/// Direction on the hemisphere about `normal` with density proportional to
/// <v, normal> (the cosine law), any dimension d >= 2.
HemisphereSample sample_cosine_direction(const VecD& normal, int d, Rng& rng);

/// Lambertian reflection at the wall: the frame-F speed is kept and the
/// frame-F direction is redrawn from the cosine law about the inward normal.
VecD reflect_lambertian(const Domain& dom, const VecD& x, const VecD& v, double t,
                        const FrameParams& fp, Rng& rng, double ball_radius = 0.0);

/// Same, given the contact already.
VecD lambertian_about(const WallContact& contact, const VecD& x, const VecD& v, double omega,
                      Rng& rng);

class LambertianLaw final : public WallLaw {
 public:
  explicit LambertianLaw(Rng& rng) : rng_(rng) {}
  VecD reflect(const Domain& dom, const WallContact& contact, const VecD& x, const VecD& v,
               double t, double omega) override;

 private:
  Rng& rng_;
};

/// Chooses Lambertian or specular reflection separately for the lateral wall
/// and for the cap faces of a finite cylinder.
class MixedLaw final : public WallLaw {
 public:
  MixedLaw(Rng& rng, bool lambertian_lateral, bool lambertian_caps)
      : rng_(rng), lateral_(lambertian_lateral), caps_(lambertian_caps) {}
  VecD reflect(const Domain& dom, const WallContact& contact, const VecD& x, const VecD& v,
               double t, double omega) override;

 private:
  Rng& rng_;
  bool lateral_;
  bool caps_;
};

/// CDF of the angle from the normal under the cosine law: (sin theta + 1)/2 on
/// (-pi/2, pi/2) for d = 2 and sin^(d-1) theta on [0, pi/2] for d >= 3.
double cosine_law_angle_cdf(double theta, int d);

}  // namespace rotodrum

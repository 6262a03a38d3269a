#include "rotodrum/frames.hpp"

#include <cmath>

#include "rotodrum/domain.hpp"
#include "rotodrum/errors.hpp"

namespace rotodrum {

void FrameParams::validate() const {
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw Error(ErrorCode::InvalidArgument, "omega must be finite and >= 0");
  }
  if (dim < 2) throw Error(ErrorCode::InvalidArgument, "dim must be >= 2");
}

VecD rotate_h(double theta, const VecD& x) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  VecD out = x;
  out[0] = c * x[0] - s * x[1];
  out[1] = s * x[0] + c * x[1];
  return out;
}

VecD l_op(const VecD& x) {
  VecD out = VecD::Zero(x.size());
  out[0] = -x[1];
  out[1] = x[0];
  return out;
}

VecD relative_velocity(const VecD& x, const VecD& v, double omega) {
  VecD u = v;
  u[0] += omega * x[1];
  u[1] -= omega * x[0];
  return u;
}

Phasepoint to_frame_f(double t, const VecD& x, const VecD& v, const FrameParams& fp) {
  const double angle = -fp.omega * t;
  return {rotate_h(angle, x), rotate_h(angle, relative_velocity(x, v, fp.omega))};
}

Phasepoint from_frame_f(double t, const VecD& xf, const VecD& vf, const FrameParams& fp) {
  const double angle = fp.omega * t;
  VecD x = rotate_h(angle, xf);
  VecD v = rotate_h(angle, vf);
  v[0] -= fp.omega * x[1];
  v[1] += fp.omega * x[0];
  return {std::move(x), std::move(v)};
}

EnergyBreakdown energy_breakdown(const SystemState& state, const FrameParams& fp) {
  EnergyBreakdown e;
  const double w2 = fp.omega * fp.omega;
  for (const Ball& b : state.balls) {
    // ||v^F|| = ||v - omega L(x)||; no rotation needed.
    const VecD u = relative_velocity(b.x, b.v, fp.omega);
    e.kinetic_F += 0.5 * b.spec.mass * u.squaredNorm();
    e.potential_F -= 0.5 * b.spec.mass * w2 * h_norm2(b.x);
    e.kinetic_inertial += 0.5 * b.spec.mass * b.v.squaredNorm();
  }
  e.total_F = e.kinetic_F + e.potential_F;
  return e;
}

}  // namespace rotodrum

#pragma once

#include <Eigen/Core>

namespace rotodrum {

/// d-dimensional Euclidean vector (positions and velocities). The first two
/// coordinates span the horizontal plane H in which the drum rotates.
using VecD = Eigen::VectorXd;

struct SystemState;

struct FrameParams {
  double omega{0.0};
  int dim{2};

  /// Throws InvalidArgument unless omega >= 0 and dim >= 2.
  void validate() const;
};

/// Position and velocity expressed in one frame.
struct Phasepoint {
  VecD x;
  VecD v;
};

struct EnergyBreakdown {
  double kinetic_F{0.0};
  double potential_F{0.0};
  double total_F{0.0};
  double kinetic_inertial{0.0};
};

/// Rotation by theta in the plane of the first two coordinates.
VecD rotate_h(double theta, const VecD& x);

/// L = R(pi/2) composed with the projection onto H: (-x2, x1, 0, ..., 0).
VecD l_op(const VecD& x);

/// Squared norm of the projection onto H.
inline double h_norm2(const VecD& x) { return x[0] * x[0] + x[1] * x[1]; }

/// v - omega L(x); equals R(omega t) v^F, i.e. the frame-F velocity written in
/// inertial axes. Its norm is the frame-F speed.
VecD relative_velocity(const VecD& x, const VecD& v, double omega);

Phasepoint to_frame_f(double t, const VecD& x, const VecD& v, const FrameParams& fp);
Phasepoint from_frame_f(double t, const VecD& xf, const VecD& vf, const FrameParams& fp);

EnergyBreakdown energy_breakdown(const SystemState& state, const FrameParams& fp);

}  // namespace rotodrum

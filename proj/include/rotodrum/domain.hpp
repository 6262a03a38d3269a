#pragma once

#include <string>
#include <variant>
#include <vector>

#include "rotodrum/frames.hpp"

namespace rotodrum {

/// Planar disc of radius rho centred on the rotation axis.
struct Disc2D {
  double rho{1.0};
};

/// D_ell: disc of radius rho in H times the cube |z_k| <= ell in the other d-2
/// coordinates.
struct CylinderFinite {
  double rho{1.0};
  double ell{1.0};
  int dim{3};
};

/// The infinite cylinder with transverse coordinates identified modulo 2.
struct CylinderTorus {
  double rho{1.0};
  int dim{3};
};

/// Planar star-shaped drum, boundary r(phi) in frame F given by a truncated
/// Fourier series a0 + sum_k (a_k cos k phi + b_k sin k phi).
struct StarShaped2D {
  std::vector<double> cos_coeffs{1.0};  // a0, a1, ...
  std::vector<double> sin_coeffs;       // b1, b2, ...

  double radius(double phi) const;
  double radius_derivative(double phi) const;
  double radius_second_derivative(double phi) const;
  double min_radius() const;
  double max_radius() const;
};

enum class DomainKind { Disc, Cylinder, Torus, Star };

/// Face index used by wall contacts. Face 0 is the lateral wall (or the star
/// boundary); face 2*(k-2)+1 / 2*(k-2)+2 are the caps z_k = +ell / z_k = -ell.
constexpr int kLateralFace = 0;

class Domain {
 public:
  using Shape = std::variant<Disc2D, CylinderFinite, CylinderTorus, StarShaped2D>;

  Domain(Shape shape);  // NOLINT(google-explicit-constructor)

  const Shape& shape() const { return shape_; }
  DomainKind kind() const;
  int dim() const;
  /// Radius of the lateral wall for disc/cylinder/torus.
  double rho() const;
  bool is_rotation_invariant() const { return kind() != DomainKind::Star; }
  bool has_caps() const { return kind() == DomainKind::Cylinder && dim() > 2; }
  const StarShaped2D& star() const { return std::get<StarShaped2D>(shape_); }
  std::string describe() const;

 private:
  Shape shape_;
};

struct BallSpec {
  double mass{1.0};
  double radius{0.0};
};

struct Ball {
  BallSpec spec;
  VecD x;  // inertial frame
  VecD v;  // inertial frame
};

struct SystemState {
  double time{0.0};
  std::vector<Ball> balls;
};

struct WallContact {
  VecD point;
  VecD inward_normal;  // inertial frame, unit length
  int face{kLateralFace};
};

/// Wraps the transverse coordinates of a torus into [-1, 1).
VecD wrap_torus(const VecD& x);

/// Minimum-image separation xj - xi (only transverse coordinates of a torus are
/// affected).
VecD separation(const Domain& dom, const VecD& xi, const VecD& xj);

/// True iff the open ball of the given radius about x (frame F coordinates) lies
/// inside the domain.
bool contains(const Domain& dom, const VecD& x, double ball_radius);

/// Centres in frame F coordinates. Containment plus pairwise disjointness.
bool admissible(const Domain& dom, const std::vector<Ball>& balls);

/// sup ||x^H|| over the domain.
double sup_h_radius(const Domain& dom);

/// Signed distance from the frame-F point x to the star boundary (positive
/// inside), with the nearest boundary parameter written to nearest_phi.
double star_signed_distance(const StarShaped2D& shape, const VecD& x, double* nearest_phi = nullptr);

/// Boundary contact point and unit inward normal, both in the inertial frame at
/// time t. Throws NotOnBoundary if x is farther than 1e-9 from touching.
WallContact wall_point_and_normal(const Domain& dom, const VecD& x, double t, double omega,
                                  double ball_radius = 0.0);

/// Same, for a prescribed face (used when the event loop already knows which
/// wall was hit).
WallContact wall_point_and_normal(const Domain& dom, const VecD& x, double t, double omega,
                                  double ball_radius, int face);

/// Local osculating-circle check for star-shaped drums: true iff every sampled
/// convex boundary point has radius of curvature >= r_max. Always true for the
/// rotation-invariant kinds.
bool curvature_condition_holds(const Domain& dom, double r_max, int samples = 4096);

}  // namespace rotodrum

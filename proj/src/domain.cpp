#include "rotodrum/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rotodrum/errors.hpp"

namespace rotodrum {
namespace {

constexpr double kBoundaryTolerance = 1e-9;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Golden-section search for the minimum of f on [a, b].
template <class F>
double golden_minimize(F&& f, double a, double b, int iterations = 90) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

template <class F>
double grid_then_refine_min(F&& f, int samples) {
  int best = 0;
  double best_val = f(0.0);
  const double step = kTwoPi / samples;
  for (int i = 1; i < samples; ++i) {
    const double val = f(i * step);
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  return golden_minimize(f, (best - 1) * step, (best + 1) * step);
}

double cap_gap(const VecD& x, int k, double ell, double r, int sign) {
  return ell - r - sign * x[k];
}

// Outward normal of the star boundary at parameter phi in frame F.
Eigen::Vector2d star_outward_normal(const StarShaped2D& s, double phi) {
  const double r = s.radius(phi);
  const double dr = s.radius_derivative(phi);
  const double c = std::cos(phi);
  const double sn = std::sin(phi);
  const Eigen::Vector2d tangent(dr * c - r * sn, dr * sn + r * c);
  return Eigen::Vector2d(tangent.y(), -tangent.x()).normalized();
}

}  // namespace

double StarShaped2D::radius(double phi) const {
  double r = cos_coeffs.empty() ? 0.0 : cos_coeffs[0];
  for (std::size_t k = 1; k < cos_coeffs.size(); ++k) r += cos_coeffs[k] * std::cos(k * phi);
  for (std::size_t k = 0; k < sin_coeffs.size(); ++k) r += sin_coeffs[k] * std::sin((k + 1) * phi);
  return r;
}

double StarShaped2D::radius_derivative(double phi) const {
  double r = 0.0;
  for (std::size_t k = 1; k < cos_coeffs.size(); ++k) r -= k * cos_coeffs[k] * std::sin(k * phi);
  for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
    r += (k + 1) * sin_coeffs[k] * std::cos((k + 1) * phi);
  }
  return r;
}

double StarShaped2D::radius_second_derivative(double phi) const {
  double r = 0.0;
  for (std::size_t k = 1; k < cos_coeffs.size(); ++k) {
    r -= double(k * k) * cos_coeffs[k] * std::cos(k * phi);
  }
  for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
    r -= double((k + 1) * (k + 1)) * sin_coeffs[k] * std::sin((k + 1) * phi);
  }
  return r;
}

double StarShaped2D::min_radius() const {
  return radius(grid_then_refine_min([this](double p) { return radius(p); }, 4096));
}

double StarShaped2D::max_radius() const {
  return radius(grid_then_refine_min([this](double p) { return -radius(p); }, 4096));
}

Domain::Domain(Shape shape) : shape_(std::move(shape)) {
  std::visit(Overloaded{
                 [](const Disc2D& s) {
                   if (!(s.rho > 0)) throw Error(ErrorCode::InvalidArgument, "rho must be > 0");
                 },
                 [](const CylinderFinite& s) {
                   if (!(s.rho > 0)) throw Error(ErrorCode::InvalidArgument, "rho must be > 0");
                   if (!(s.ell > 0)) throw Error(ErrorCode::InvalidArgument, "ell must be > 0");
                   if (s.dim < 2) throw Error(ErrorCode::InvalidArgument, "dim must be >= 2");
                 },
                 [](const CylinderTorus& s) {
                   if (!(s.rho > 0)) throw Error(ErrorCode::InvalidArgument, "rho must be > 0");
                   if (s.dim < 2) throw Error(ErrorCode::InvalidArgument, "dim must be >= 2");
                 },
                 [](const StarShaped2D& s) {
                   if (s.cos_coeffs.empty()) {
                     throw Error(ErrorCode::InvalidArgument, "star radius needs a constant term");
                   }
                   if (!(s.min_radius() > 0)) {
                     throw Error(ErrorCode::InvalidArgument, "star radius must be strictly positive");
                   }
                 },
             },
             shape_);
}

DomainKind Domain::kind() const {
  return std::visit(Overloaded{
                        [](const Disc2D&) { return DomainKind::Disc; },
                        [](const CylinderFinite&) { return DomainKind::Cylinder; },
                        [](const CylinderTorus&) { return DomainKind::Torus; },
                        [](const StarShaped2D&) { return DomainKind::Star; },
                    },
                    shape_);
}

int Domain::dim() const {
  return std::visit(Overloaded{
                        [](const Disc2D&) { return 2; },
                        [](const CylinderFinite& s) { return s.dim; },
                        [](const CylinderTorus& s) { return s.dim; },
                        [](const StarShaped2D&) { return 2; },
                    },
                    shape_);
}

double Domain::rho() const {
  return std::visit(Overloaded{
                        [](const Disc2D& s) { return s.rho; },
                        [](const CylinderFinite& s) { return s.rho; },
                        [](const CylinderTorus& s) { return s.rho; },
                        [](const StarShaped2D& s) { return s.max_radius(); },
                    },
                    shape_);
}

std::string Domain::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Disc2D& s) { os << "disc(rho=" << s.rho << ")"; },
                 [&](const CylinderFinite& s) {
                   os << "cylinder(rho=" << s.rho << ", ell=" << s.ell << ", d=" << s.dim << ")";
                 },
                 [&](const CylinderTorus& s) { os << "torus(rho=" << s.rho << ", d=" << s.dim << ")"; },
                 [&](const StarShaped2D& s) {
                   os << "star(" << s.cos_coeffs.size() << " cos, " << s.sin_coeffs.size()
                      << " sin terms)";
                 },
             },
             shape_);
  return os.str();
}

VecD wrap_torus(const VecD& x) {
  VecD out = x;
  for (Eigen::Index k = 2; k < out.size(); ++k) {
    out[k] -= 2.0 * std::floor((out[k] + 1.0) / 2.0);
  }
  return out;
}

VecD separation(const Domain& dom, const VecD& xi, const VecD& xj) {
  VecD d = xj - xi;
  if (dom.kind() == DomainKind::Torus) {
    for (Eigen::Index k = 2; k < d.size(); ++k) d[k] -= 2.0 * std::round(d[k] / 2.0);
  }
  return d;
}

bool contains(const Domain& dom, const VecD& x, double ball_radius) {
  if (x.size() != dom.dim()) return false;
  return std::visit(
      Overloaded{
          [&](const Disc2D& s) { return std::sqrt(h_norm2(x)) + ball_radius <= s.rho; },
          [&](const CylinderFinite& s) {
            if (std::sqrt(h_norm2(x)) + ball_radius > s.rho) return false;
            for (Eigen::Index k = 2; k < x.size(); ++k) {
              if (std::abs(x[k]) + ball_radius > s.ell) return false;
            }
            return true;
          },
          [&](const CylinderTorus& s) {
            return ball_radius < 1.0 && std::sqrt(h_norm2(x)) + ball_radius <= s.rho;
          },
          [&](const StarShaped2D& s) {
            if (ball_radius == 0.0) {
              return std::sqrt(h_norm2(x)) <= s.radius(std::atan2(x[1], x[0]));
            }
            return star_signed_distance(s, x) >= ball_radius;
          },
      },
      dom.shape());
}

bool admissible(const Domain& dom, const std::vector<Ball>& balls) {
  for (const Ball& b : balls) {
    if (!(b.spec.mass > 0) || b.spec.radius < 0) return false;
    if (!contains(dom, b.x, b.spec.radius)) return false;
  }
  for (std::size_t i = 0; i < balls.size(); ++i) {
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      const double reach = balls[i].spec.radius + balls[j].spec.radius;
      if (separation(dom, balls[i].x, balls[j].x).norm() < reach) return false;
    }
  }
  return true;
}

double sup_h_radius(const Domain& dom) { return dom.rho(); }

double star_signed_distance(const StarShaped2D& shape, const VecD& x, double* nearest_phi) {
  const double px = x[0];
  const double py = x[1];
  auto dist2 = [&](double phi) {
    const double r = shape.radius(phi);
    const double dx = px - r * std::cos(phi);
    const double dy = py - r * std::sin(phi);
    return dx * dx + dy * dy;
  };
  // Coarse scan around the polar angle of x, then golden-section refinement.
  const double base = std::atan2(py, px);
  constexpr int kSamples = 64;
  const double half_window = std::numbers::pi / 2;
  const double step = 2 * half_window / kSamples;
  double best_phi = base;
  double best = dist2(base);
  for (int i = 0; i <= kSamples; ++i) {
    const double phi = base - half_window + i * step;
    const double d2 = dist2(phi);
    if (d2 < best) {
      best = d2;
      best_phi = phi;
    }
  }
  const double phi = golden_minimize(dist2, best_phi - step, best_phi + step);
  if (nearest_phi) *nearest_phi = phi;
  const double dist = std::sqrt(dist2(phi));
  const bool inside = std::hypot(px, py) < shape.radius(base);
  return inside ? dist : -dist;
}

WallContact wall_point_and_normal(const Domain& dom, const VecD& x, double t, double omega,
                                  double ball_radius, int face) {
  const int d = dom.dim();
  if (x.size() != d) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  WallContact c;
  c.face = face;
  if (dom.kind() == DomainKind::Star) {
    if (face != kLateralFace) throw Error(ErrorCode::InvalidArgument, "star drum has one face");
    const StarShaped2D& s = dom.star();
    const VecD xf = rotate_h(-omega * t, x);
    double phi = std::atan2(xf[1], xf[0]);
    double gap = 0.0;
    if (ball_radius == 0.0) {
      gap = s.radius(phi) - std::sqrt(h_norm2(xf));
    } else {
      gap = star_signed_distance(s, xf, &phi) - ball_radius;
    }
    if (std::abs(gap) > kBoundaryTolerance) {
      throw Error(ErrorCode::NotOnBoundary, "distance to star boundary " + std::to_string(gap));
    }
    const Eigen::Vector2d out = star_outward_normal(s, phi);
    const double r = s.radius(phi);
    VecD point(2);
    point << r * std::cos(phi), r * std::sin(phi);
    VecD normal(2);
    normal << -out.x(), -out.y();
    c.point = rotate_h(omega * t, point);
    c.inward_normal = rotate_h(omega * t, normal);
    return c;
  }

  c.inward_normal = VecD::Zero(d);
  if (face == kLateralFace) {
    const double rh = std::sqrt(h_norm2(x));
    const double gap = dom.rho() - ball_radius - rh;
    if (std::abs(gap) > kBoundaryTolerance || rh == 0.0) {
      throw Error(ErrorCode::NotOnBoundary, "distance to lateral wall " + std::to_string(gap));
    }
    c.inward_normal[0] = -x[0] / rh;
    c.inward_normal[1] = -x[1] / rh;
  } else {
    if (!dom.has_caps()) throw Error(ErrorCode::InvalidArgument, "domain has no cap faces");
    const int k = 2 + (face - 1) / 2;
    const int sign = (face % 2 == 1) ? 1 : -1;
    if (k >= d) throw Error(ErrorCode::InvalidArgument, "cap face out of range");
    const double ell = std::get<CylinderFinite>(dom.shape()).ell;
    const double gap = cap_gap(x, k, ell, ball_radius, sign);
    if (std::abs(gap) > kBoundaryTolerance) {
      throw Error(ErrorCode::NotOnBoundary, "distance to cap face " + std::to_string(gap));
    }
    c.inward_normal[k] = -sign;
  }
  c.point = x - ball_radius * c.inward_normal;
  return c;
}

WallContact wall_point_and_normal(const Domain& dom, const VecD& x, double t, double omega,
                                  double ball_radius) {
  if (dom.kind() == DomainKind::Star) {
    return wall_point_and_normal(dom, x, t, omega, ball_radius, kLateralFace);
  }
  // Pick the face with the smallest |gap|; the lateral wall wins ties.
  int best_face = kLateralFace;
  double best_gap = std::abs(dom.rho() - ball_radius - std::sqrt(h_norm2(x)));
  if (dom.has_caps()) {
    const double ell = std::get<CylinderFinite>(dom.shape()).ell;
    for (int k = 2; k < dom.dim(); ++k) {
      for (int sign : {1, -1}) {
        const double gap = std::abs(cap_gap(x, k, ell, ball_radius, sign));
        if (gap < best_gap) {
          best_gap = gap;
          best_face = 2 * (k - 2) + (sign > 0 ? 1 : 2);
        }
      }
    }
  }
  return wall_point_and_normal(dom, x, t, omega, ball_radius, best_face);
}

bool curvature_condition_holds(const Domain& dom, double r_max, int samples) {
  if (dom.kind() != DomainKind::Star || r_max <= 0.0) return true;
  const StarShaped2D& s = dom.star();
  for (int i = 0; i < samples; ++i) {
    const double phi = kTwoPi * i / samples;
    const double r = s.radius(phi);
    const double dr = s.radius_derivative(phi);
    const double ddr = s.radius_second_derivative(phi);
    const double kappa = (r * r + 2 * dr * dr - r * ddr) / std::pow(r * r + dr * dr, 1.5);
    if (kappa > 0 && 1.0 / kappa < r_max) return false;
  }
  return true;
}

}  // namespace rotodrum

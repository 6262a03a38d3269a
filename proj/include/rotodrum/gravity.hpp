#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rotodrum/errors.hpp"
#include "rotodrum/random.hpp"
#include "rotodrum/stats.hpp"

namespace rotodrum {

using Vec2 = Eigen::Vector2d;

/// Two reflection points on the unit circle of a drum rotating at omega, with
/// gravity g pointing along -y in the inertial frame.
struct BouncePoints {
  Vec2 p1{0.0, 1.0};
  Vec2 p2{1.0, 0.0};
  double g{1.0};
  double omega{1.0};

  /// Throws InvalidArgument unless both points lie on the unit circle (1e-12),
  /// are distinct, and g, omega > 0.
  void validate() const;
  bool vertical() const { return p1.x() == p2.x(); }
  /// Chord slope (y2 - y1) / (x2 - x1).
  double slope() const;
  /// x2 - x1.
  double span() const { return p2.x() - p1.x(); }
};

struct Parabola {
  Vec2 v0;
  double t_flight{0.0};
};

/// Launch velocity from `from` with horizontal velocity vx so that the
/// trajectory passes through `to`.
Parabola parabola_through(const Vec2& from, const Vec2& to, double vx, double g);

/// True iff the trajectory from `from` with launch velocity v0 stays strictly
/// inside the unit disc on the open interval (0, t_flight).
bool stays_inside(const Vec2& from, const Vec2& v0, double t_flight, double g);

/// Leading terms of the outgoing-velocity expansion at the given reflection point.
double delta0(const BouncePoints& bp);
double delta2(const BouncePoints& bp, bool at_p2);

/// Coefficients (cubic, quadratic, linear, constant) in delta of the
/// energy-balance polynomial at u = 1 / w with the irrelevant root removed.
std::array<double, 4> bounce_polynomial(double u, const BouncePoints& bp, bool at_p2);

struct DeltaSolution {
  double delta{0.0};
  double residual{0.0};  // |F(u, delta)|
  double scale{0.0};     // max coefficient magnitude
  int iterations{0};
  bool bisected{false};
  /// Another root of the polynomial also gives a valid outgoing flight.
  bool ambiguous{false};
};

DeltaSolution solve_bounce_delta(double w, const BouncePoints& bp, bool at_p2);

/// delta = v_x(s-) + v_x(s+) at a reflection with incoming horizontal velocity w.
double bounce_delta(double w, const BouncePoints& bp, bool at_p2);

/// Reflection on a vertical chord: v_y' = -v_y + 2 omega x_contact.
Vec2 vertical_bounce(const Vec2& v_pre, double x_contact, double omega);

/// 20 * max(1, g, omega).
double default_speed_floor(const BouncePoints& bp);

struct BounceRecord {
  std::size_t k{0};  // reflection index; p2 for even k, p1 for odd k
  double s{0.0};     // reflection time
  Vec2 v_pre;
  Vec2 v_post;
  double delta{0.0};
  double residual{0.0};
  double ek{0.0};          // |v(s-)|^2 / 2
  double ef_contact{0.0};  // |v(s+) - omega L(p)|^2 / 2 - omega^2 / 2
};

struct BounceSequence {
  Vec2 v_initial;
  std::vector<BounceRecord> records;
  bool ambiguous_branch{false};
};

class SequenceTerminated : public Error {
 public:
  SequenceTerminated(const std::string& what, BounceSequence partial)
      : Error(ErrorCode::SequenceTerminates, what), partial_(std::move(partial)) {}
  const BounceSequence& partial() const { return partial_; }

 private:
  BounceSequence partial_;
};

/// Alternating p1 -> p2 -> p1 ... reflections starting from p1 at time 0 with
/// |v_x| = initial_speed (|v_y| for a vertical chord). Throws InvalidArgument
/// below speed_floor and SequenceTerminated when a reflection cannot be built.
BounceSequence iterate_bounces(const BouncePoints& bp, double initial_speed,
                               std::size_t n_bounces, double speed_floor = -1.0);

/// c1 = g omega (x2 - x1)^3 (x1 + x2) / ((x2 - x1)^2 + (y2 - y1)^2).
double growth_constant(const BouncePoints& bp);

struct AsymptoticsFit {
  double c1{0.0};
  // log|v_x(s_k-)| = log(prefactor) + exponent * log k, even k.
  double exponent{0.0};
  double prefactor{0.0};
  // |v_x(s_k-)|^3 = cube_intercept + cube_slope * k, even k.
  double cube_slope{0.0};
  double cube_intercept{0.0};
  // Same log-log fit against k - k0 with k0 = -cube_intercept / cube_slope.
  double shifted_exponent{0.0};
  double shifted_prefactor{0.0};
  // s_k = s_coefficient * k^(2/3) + const.
  double s_coefficient{0.0};
  // |v(s_k-)|^2 against s_k.
  double energy_slope{0.0};
  std::size_t samples{0};
};

AsymptoticsFit fit_asymptotics(std::span<const BounceRecord> records, const BouncePoints& bp);

/// Columns: k,s_k,vx_pre,vy_pre,vx_post,vy_post,delta,residual,EK,EF_contact
void write_bounce_csv(std::ostream& os, std::span<const BounceRecord> records);

struct EnergyTrace {
  double initial_ek{0.0};
  double max_ek{0.0};
  std::size_t events{0};
  double max_speed_drift{0.0};  // worst | |u'| - |u| | at a reflection
  RunningStats flight_times;
  std::vector<double> ek;       // at each reflection, if requested
};

/// Pointlike particle under gravity in a rotating disc of radius rho with
/// Lambertian reflections, started on the wall at `start` with velocity v_init.
EnergyTrace lambertian_gravity_run(double rho, double omega, double g, const Vec2& start,
                                   const Vec2& v_init, std::size_t max_events, Rng& rng,
                                   bool keep_trace = false);

}  // namespace rotodrum

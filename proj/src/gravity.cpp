#include "rotodrum/gravity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "rotodrum/frames.hpp"
#include "rotodrum/lambertian.hpp"
#include "rotodrum/polynomial.hpp"

namespace rotodrum {
namespace {

constexpr double kOnCircle = 1e-12;
constexpr double kEnergyTolerance = 1e-10;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// |v - omega L(p)|^2 for a contact point p.
double frame_speed2(const Vec2& v, const Vec2& p, double omega) {
  return (v.x() + omega * p.y()) * (v.x() + omega * p.y()) +
         (v.y() - omega * p.x()) * (v.y() - omega * p.x());
}

double contact_energy(const Vec2& v, const Vec2& p, double omega) {
  return 0.5 * frame_speed2(v, p, omega) - 0.5 * omega * omega * p.squaredNorm();
}

struct Contact {
  Vec2 at;
  Vec2 prev;
};

Contact contact_of(const BouncePoints& bp, bool at_p2) {
  return at_p2 ? Contact{bp.p2, bp.p1} : Contact{bp.p1, bp.p2};
}

BounceRecord make_record(std::size_t k, double s, const Vec2& v_pre, const Vec2& v_post,
                         double delta, double residual, const Vec2& p, double omega) {
  BounceRecord r;
  r.k = k;
  r.s = s;
  r.v_pre = v_pre;
  r.v_post = v_post;
  r.delta = delta;
  r.residual = residual;
  r.ek = 0.5 * v_pre.squaredNorm();
  r.ef_contact = contact_energy(v_post, p, omega);
  return r;
}

BounceSequence iterate_vertical(const BouncePoints& bp, double speed, std::size_t n) {
  BounceSequence seq;
  Vec2 from = bp.p1;
  Vec2 to = bp.p2;
  double vy = sign_of(to.y() - from.y()) * speed;
  seq.v_initial = Vec2(0.0, vy);
  double s = 0.0;
  for (std::size_t k = 2; k < n + 2; ++k) {
    // (g/2) t^2 - vy t + dy = 0, first positive root.
    const double dy = to.y() - from.y();
    const double a = 0.5 * bp.g;
    const double disc = vy * vy - 4.0 * a * dy;
    if (disc < 0.0) throw SequenceTerminated("vertical flight does not reach the next point", seq);
    const double q = 0.5 * (vy + sign_of(vy) * std::sqrt(disc));
    double t = -1.0;
    for (double root : {q / a, q != 0.0 ? dy / q : -1.0}) {
      if (root > 0.0 && (t < 0.0 || root < t)) t = root;
    }
    if (!(t > 0.0)) throw SequenceTerminated("vertical flight does not reach the next point", seq);
    s += t;
    const Vec2 v_pre(0.0, vy - bp.g * t);
    const Vec2 v_post = vertical_bounce(v_pre, to.x(), bp.omega);
    if (sign_of(v_post.y()) != sign_of(from.y() - to.y())) {
      throw SequenceTerminated("vertical reflection points away from the other point", seq);
    }
    seq.records.push_back(
        make_record(k, s, v_pre, v_post, 2.0 * bp.omega * to.x(), 0.0, to, bp.omega));
    std::swap(from, to);
    vy = v_post.y();
  }
  return seq;
}

}  // namespace

void BouncePoints::validate() const {
  if (std::abs(p1.norm() - 1.0) > kOnCircle || std::abs(p2.norm() - 1.0) > kOnCircle) {
    throw Error(ErrorCode::InvalidArgument, "reflection points must lie on the unit circle");
  }
  if ((p1 - p2).norm() == 0.0) throw Error(ErrorCode::InvalidArgument, "points coincide");
  if (!(g > 0.0) || !(omega > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "g and omega must be positive");
  }
}

double BouncePoints::slope() const {
  if (vertical()) throw Error(ErrorCode::VerticalChord, "vertical chord has no slope");
  return (p2.y() - p1.y()) / (p2.x() - p1.x());
}

Parabola parabola_through(const Vec2& from, const Vec2& to, double vx, double g) {
  const double run = to.x() - from.x();
  if (run == 0.0) throw Error(ErrorCode::VerticalChord, "endpoints share an x coordinate");
  if (sign_of(vx) != sign_of(run)) {
    throw Error(ErrorCode::InvalidArgument, "vx must point from `from` towards `to`");
  }
  const double slope = (to.y() - from.y()) / run;
  Parabola p;
  p.t_flight = run / vx;
  p.v0 = Vec2(vx, slope * vx + g * run / (2.0 * vx));
  return p;
}

bool stays_inside(const Vec2& from, const Vec2& v0, double t_flight, double g) {
  if (!(t_flight > 0.0)) return false;
  // q(t) = |x(t)|^2 = q4 t^4 + q3 t^3 + q2 t^2 + q1 t + q0
  const double q4 = 0.25 * g * g;
  const double q3 = -g * v0.y();
  const double q2 = v0.squaredNorm() - g * from.y();
  const double q1 = 2.0 * from.dot(v0);
  const double q0 = from.squaredNorm();
  const double coeffs[] = {q4, q3, q2, q1, q0};
  auto dq = [&](double t) { return ((4 * q4 * t + 3 * q3) * t + 2 * q2) * t + q1; };
  if (!(q1 < 0.0) || !(dq(t_flight) > 0.0)) return false;
  for (double t : cubic_real_roots(4 * q4, 3 * q3, 2 * q2, q1)) {
    if (t > 0.0 && t < t_flight && !(polyval(coeffs, t) < 1.0)) return false;
  }
  return true;
}

double delta0(const BouncePoints& bp) {
  const double lambda = bp.slope();
  return 2.0 * bp.omega * (lambda * bp.p2.x() - bp.p2.y()) / (1.0 + lambda * lambda);
}

double delta2(const BouncePoints& bp, bool at_p2) {
  const Contact c = contact_of(bp, at_p2);
  const double lambda = bp.slope();
  const double run_in = c.at.x() - c.prev.x();
  return -run_in * bp.g * bp.omega * c.at.x() / (1.0 + lambda * lambda);
}

std::array<double, 4> bounce_polynomial(double u, const BouncePoints& bp, bool at_p2) {
  const Contact c = contact_of(bp, at_p2);
  const double lambda = bp.slope();
  const double run_in = c.at.x() - c.prev.x();
  const double a = 1.0 + lambda * lambda;
  const double b = 2.0 * bp.omega * (c.at.y() - lambda * c.at.x());
  const double cc = run_in * bp.g * bp.omega * c.at.x();
  const double d = run_in * run_in * bp.g * bp.g;
  const double u2 = u * u;
  return {4.0 * u2 * a, 4.0 * (-2.0 * u * a + u2 * b),
          4.0 * (a - 2.0 * u * b) - 4.0 * cc * u2 * u - d * u2 * u2, 4.0 * b + 4.0 * cc * u2};
}

DeltaSolution solve_bounce_delta(double w, const BouncePoints& bp, bool at_p2) {
  if (bp.vertical()) throw Error(ErrorCode::VerticalChord, "use vertical_bounce");
  if (w == 0.0 || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "w must be nonzero");
  const double u = 1.0 / w;
  const std::array<double, 4> c = bounce_polynomial(u, bp, at_p2);
  const double d0 = delta0(bp);
  const double d2 = delta2(bp, at_p2);
  const double seed = d0 + d2 * u * u;
  const double width =
      10.0 * (std::abs(d2) * u * u + (1.0 + std::abs(d0)) * std::abs(u * u * u)) +
      1e-12 * (1.0 + std::abs(d0));
  auto f = [&](double x) { return ((c[0] * x + c[1]) * x + c[2]) * x + c[3]; };
  auto df = [&](double x) { return (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2]; };

  DeltaSolution sol;
  sol.scale = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2]), std::abs(c[3])});
  double x = seed;
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    sol.iterations = it + 1;
    const double slope = df(x);
    if (slope == 0.0) break;
    const double step = f(x) / slope;
    x -= step;
    if (!std::isfinite(x)) break;
    if (std::abs(step) <= 4e-16 * (1.0 + std::abs(x))) {
      converged = true;
      break;
    }
  }
  if (!converged || std::abs(x - seed) > width) {
    double lo = seed - width;
    double hi = seed + width;
    double flo = f(lo);
    if (sign_of(flo) == sign_of(f(hi))) {
      throw Error(ErrorCode::RootNotFound, "no root near the expansion seed for w = " +
                                                 std::to_string(w));
    }
    for (int it = 0; it < 200 && hi - lo > 4e-16 * (1.0 + std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if (sign_of(fm) == sign_of(flo)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    x = 0.5 * (lo + hi);
    sol.bisected = true;
  }
  sol.delta = x;
  sol.residual = std::abs(f(x));
  if (sol.residual > 1e-12 * sol.scale) {
    throw Error(ErrorCode::RootNotFound, "residual " + std::to_string(sol.residual));
  }
  if (std::abs(x - 2.0 * w) < 1e-6 * std::abs(w)) {
    throw Error(ErrorCode::IrrelevantRoot, "root coincides with 2w");
  }

  const Contact ct = contact_of(bp, at_p2);
  const double run_out = ct.prev.x() - ct.at.x();
  if (c[0] != 0.0) {
    for (double r : cubic_real_roots(c[0], c[1], c[2], c[3])) {
      if (std::abs(r - x) <= 1e-8 * (1.0 + std::abs(x))) continue;
      const double vx = -w + r;
      if (sign_of(vx) != sign_of(run_out) || std::abs(r - 2.0 * w) < 1e-6 * std::abs(w)) continue;
      const Parabola p = parabola_through(ct.at, ct.prev, vx, bp.g);
      if (stays_inside(ct.at, p.v0, p.t_flight, bp.g)) sol.ambiguous = true;
    }
  }
  return sol;
}

double bounce_delta(double w, const BouncePoints& bp, bool at_p2) {
  return solve_bounce_delta(w, bp, at_p2).delta;
}

Vec2 vertical_bounce(const Vec2& v_pre, double x_contact, double omega) {
  return Vec2(0.0, -v_pre.y() + 2.0 * omega * x_contact);
}

double default_speed_floor(const BouncePoints& bp) {
  return 20.0 * std::max({1.0, bp.g, bp.omega});
}

BounceSequence iterate_bounces(const BouncePoints& bp, double initial_speed,
                               std::size_t n_bounces, double speed_floor) {
  bp.validate();
  const double floor = speed_floor < 0.0 ? default_speed_floor(bp) : speed_floor;
  if (!(initial_speed >= floor)) {
    throw Error(ErrorCode::InvalidArgument, "initial speed below the floor " +
                                                std::to_string(floor));
  }
  if (bp.vertical()) return iterate_vertical(bp, initial_speed, n_bounces);

  const double lambda = bp.slope();
  BounceSequence seq;
  double vx = sign_of(bp.span()) * initial_speed;
  Parabola flight = parabola_through(bp.p1, bp.p2, vx, bp.g);
  seq.v_initial = flight.v0;
  if (!stays_inside(bp.p1, flight.v0, flight.t_flight, bp.g)) {
    throw SequenceTerminated("first flight leaves the disc", seq);
  }
  double s = 0.0;
  for (std::size_t k = 2; k < n_bounces + 2; ++k) {
    const bool at_p2 = k % 2 == 0;
    const Contact ct = contact_of(bp, at_p2);
    const double run_in = ct.at.x() - ct.prev.x();
    s += flight.t_flight;
    const double w = vx;
    const Vec2 v_pre(w, lambda * w - bp.g * run_in / (2.0 * w));
    DeltaSolution sol;
    try {
      sol = solve_bounce_delta(w, bp, at_p2);
    } catch (const Error& e) {
      throw SequenceTerminated(e.what(), seq);
    }
    seq.ambiguous_branch = seq.ambiguous_branch || sol.ambiguous;
    const double vx_out = -w + sol.delta;
    if (sign_of(vx_out) != sign_of(-run_in)) {
      throw SequenceTerminated("outgoing v_x points away from the other point", seq);
    }
    flight = parabola_through(ct.at, ct.prev, vx_out, bp.g);
    if (!stays_inside(ct.at, flight.v0, flight.t_flight, bp.g)) {
      throw SequenceTerminated("flight after reflection " + std::to_string(k) + " leaves the disc",
                               seq);
    }
    const double e_pre = frame_speed2(v_pre, ct.at, bp.omega);
    const double e_post = frame_speed2(flight.v0, ct.at, bp.omega);
    if (std::abs(e_post - e_pre) > kEnergyTolerance * std::max(1.0, e_pre)) {
      throw SequenceTerminated("energy in the rotating frame not conserved", seq);
    }
    seq.records.push_back(
        make_record(k, s, v_pre, flight.v0, sol.delta, sol.residual, ct.at, bp.omega));
    vx = vx_out;
  }
  return seq;
}

double growth_constant(const BouncePoints& bp) {
  const double dx = bp.p2.x() - bp.p1.x();
  const double dy = bp.p2.y() - bp.p1.y();
  return bp.g * bp.omega * dx * dx * dx * (bp.p1.x() + bp.p2.x()) / (dx * dx + dy * dy);
}

AsymptoticsFit fit_asymptotics(std::span<const BounceRecord> records, const BouncePoints& bp) {
  if (records.size() < 1000) {
    throw Error(ErrorCode::InsufficientData, "need at least 1000 reflections");
  }
  AsymptoticsFit fit;
  fit.c1 = growth_constant(bp);
  fit.samples = records.size();

  std::vector<double> log_k, log_v, ks, cubes;
  std::vector<double> k23, times, times_all, energy;
  for (const BounceRecord& r : records) {
    const auto k = static_cast<double>(r.k);
    k23.push_back(std::cbrt(k * k));
    times.push_back(r.s);
    energy.push_back(r.v_pre.squaredNorm());
    if (r.k % 2 != 0) continue;
    const double speed = std::abs(r.v_pre.x());
    log_k.push_back(std::log(k));
    log_v.push_back(std::log(speed));
    ks.push_back(k);
    cubes.push_back(speed * speed * speed);
  }
  const LinearFit raw = linear_fit(log_k, log_v);
  fit.exponent = raw.slope;
  fit.prefactor = std::exp(raw.intercept);
  const LinearFit cube = linear_fit(ks, cubes);
  fit.cube_slope = cube.slope;
  fit.cube_intercept = cube.intercept;
  if (cube.slope != 0.0) {
    const double origin = -cube.intercept / cube.slope;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (ks[i] - origin > 1.0) {
        lx.push_back(std::log(ks[i] - origin));
        ly.push_back(log_v[i]);
      }
    }
    if (lx.size() >= 2) {
      const LinearFit shifted = linear_fit(lx, ly);
      fit.shifted_exponent = shifted.slope;
      fit.shifted_prefactor = std::exp(shifted.intercept);
    }
  }
  fit.s_coefficient = linear_fit(k23, times).slope;
  fit.energy_slope = linear_fit(times, energy).slope;
  return fit;
}

void write_bounce_csv(std::ostream& os, std::span<const BounceRecord> records) {
  os << "k,s_k,vx_pre,vy_pre,vx_post,vy_post,delta,residual,EK,EF_contact\n";
  std::ostringstream line;
  line.precision(17);
  for (const BounceRecord& r : records) {
    line.str("");
    line << r.k << ',' << r.s << ',' << r.v_pre.x() << ',' << r.v_pre.y() << ','
         << r.v_post.x() << ',' << r.v_post.y() << ',' << r.delta << ',' << r.residual << ','
         << r.ek << ',' << r.ef_contact << '\n';
    os << line.str();
  }
}

EnergyTrace lambertian_gravity_run(double rho, double omega, double g, const Vec2& start,
                                   const Vec2& v_init, std::size_t max_events, Rng& rng,
                                   bool keep_trace) {
  if (!(rho > 0.0) || !(g >= 0.0) || !(omega >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "need rho > 0, g >= 0, omega >= 0");
  }
  if (std::abs(start.norm() - rho) > 1e-9) {
    throw Error(ErrorCode::NotOnBoundary, "start point must lie on the wall");
  }
  if (!(start.dot(v_init) < 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "initial velocity must point into the disc");
  }
  const Vec2 accel(0.0, -g);
  Vec2 c = start * (rho / start.norm());
  Vec2 v = v_init;
  EnergyTrace trace;
  trace.initial_ek = 0.5 * v.squaredNorm();
  trace.max_ek = trace.initial_ek;
  VecD normal(2);
  VecD pos(2);
  VecD vel(2);

  for (std::size_t e = 0; e < max_events; ++e) {
    // |x(t)|^2 - rho^2 = t * cubic(t) for a start on the wall.
    const double coeffs[] = {0.25 * g * g, -g * v.y(), v.squaredNorm() - g * c.y(),
                             2.0 * c.dot(v)};
    std::vector<double> roots = companion_real_roots(coeffs);
    auto outward = [&](double t) {
      const Vec2 x = c + v * t + 0.5 * accel * t * t;
      return x.dot(v + accel * t) > 0.0;
    };
    double hit = -1.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      const double t = roots[i];
      if (!(t > 1e-12)) continue;
      // Grazing double root: skip both copies.
      if (i + 1 < roots.size() && roots[i + 1] - t < 1e-10) {
        ++i;
        continue;
      }
      if (outward(t + 1e-9) || outward(t)) {
        hit = t;
        break;
      }
    }
    if (hit < 0.0) throw Error(ErrorCode::NoWallHit, "no wall crossing for the flight");
    const Vec2 x = c + v * hit + 0.5 * accel * hit * hit;
    const Vec2 v_arr = v + accel * hit;
    trace.flight_times.add(hit);
    c = x * (rho / x.norm());
    const double ek_pre = 0.5 * v_arr.squaredNorm();

    pos << c.x(), c.y();
    vel << v_arr.x(), v_arr.y();
    normal << -c.x() / rho, -c.y() / rho;
    const double speed = relative_velocity(pos, vel, omega).norm();
    const VecD dir = sample_cosine_direction(normal, 2, rng).direction;
    const Vec2 u_out = speed * Vec2(dir[0], dir[1]);
    trace.max_speed_drift = std::max(trace.max_speed_drift, std::abs(u_out.norm() - speed));
    v = u_out + omega * Vec2(-c.y(), c.x());
    const double ek_post = 0.5 * v.squaredNorm();
    trace.max_ek = std::max({trace.max_ek, ek_pre, ek_post});
    if (keep_trace) trace.ek.push_back(ek_post);
    ++trace.events;
  }
  return trace;
}

}  // namespace rotodrum

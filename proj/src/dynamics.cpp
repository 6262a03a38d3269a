#include "rotodrum/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "rotodrum/errors.hpp"
#include "rotodrum/random.hpp"

namespace rotodrum {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kContactTolerance = 1e-9;

// Lateral wall: larger root of ||x^H + t v^H|| = reach.
double lateral_time(const VecD& x, const VecD& v, double reach) {
  const double a = v[0] * v[0] + v[1] * v[1];
  if (a == 0.0) return kInf;
  const double b = x[0] * v[0] + x[1] * v[1];
  const double c = x[0] * x[0] + x[1] * x[1] - reach * reach;
  const double disc = std::max(b * b - a * c, 0.0);
  const double s = std::sqrt(disc);
  const double t = (b <= 0.0) ? (-b + s) / a : -c / (b + s);
  return std::max(t, 0.0);
}

template <class G>
double bisect_crossing(G&& g, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

template <class G>
double golden_min_time(G&& g, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int i = 0; i < 80; ++i) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  return 0.5 * (a + b);
}

double star_time(const StarShaped2D& star, const VecD& x, const VecD& v, double r, double t0,
                 double omega) {
  auto gap = [&](double s) {
    const VecD xs = x + s * v;
    const VecD xf = rotate_h(-omega * (t0 + s), xs);
    if (r == 0.0) return star.radius(std::atan2(xf[1], xf[0])) - std::hypot(xf[0], xf[1]);
    return star_signed_distance(star, xf) - r;
  };
  const double r_min = star.min_radius();
  const double r_max = star.max_radius();
  const double speed = v.norm();
  const double sweep = speed + omega * r_max;
  if (sweep == 0.0) return kInf;
  const double h = 1e-3 * r_min / sweep;
  double span = h;
  if (speed > 0.0) span += 2.0 * r_max / speed;
  if (omega > 0.0) span += 2.0 * std::numbers::pi / omega;
  // Lower bound on the distance to the boundary, used to take larger steps
  // while the ball is far from the wall. The gap moves at most `sweep` per unit
  // time, so a step of safe/sweep cannot jump over a crossing.
  auto safe_distance = [&](double s, double g) {
    if (r > 0.0) return std::max(g, 0.0);
    const VecD xs = x + s * v;
    return std::max(r_min - std::hypot(xs[0], xs[1]), 0.0);
  };

  double g_prev2 = kInf;
  double t_prev2 = 0.0;
  double g_prev = gap(0.0);
  if (g_prev <= 0.0) {
    const double g1 = gap(h);
    if (g1 < g_prev) return 0.0;
    g_prev = g1 > 0.0 ? std::numeric_limits<double>::min() : g1;
  }
  double t_prev = 0.0;
  while (t_prev < span) {
    const double t = t_prev + std::max(h, safe_distance(t_prev, g_prev) / sweep);
    const double g = gap(t);
    if (g_prev > 0.0 && g <= 0.0) return bisect_crossing(gap, t_prev, t);
    // Grazing: a dip between grid points that never shows a sign change.
    if (std::isfinite(g_prev2) && g_prev < g_prev2 && g_prev < g && g_prev > 0.0) {
      const double t_min = golden_min_time(gap, t_prev2, t);
      if (gap(t_min) <= 0.0) return bisect_crossing(gap, t_prev2, t_min);
    }
    g_prev2 = g_prev;
    t_prev2 = t_prev;
    g_prev = g;
    t_prev = t;
  }
  throw Error(ErrorCode::NoWallHit, "no star boundary crossing within the search horizon");
}

std::optional<double> pair_time_raw(const VecD& d, const VecD& dv, double reach) {
  const double b = d.dot(dv);
  if (b >= 0.0) return std::nullopt;
  const double a = dv.squaredNorm();
  const double c = d.squaredNorm() - reach * reach;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double t = c / (-b + std::sqrt(disc));
  return std::max(t, 0.0);
}

struct PairPrediction {
  std::optional<double> dt;
  double valid_for{kInf};
};

// On the torus the nearest images can change during flight; hits are only
// trusted while each transverse relative coordinate moves by less than 1.
PairPrediction torus_pair(const VecD& d0, const VecD& dv, double reach) {
  const auto transverse = d0.size() - 2;
  double max_rate = 0.0;
  for (Eigen::Index k = 2; k < dv.size(); ++k) max_rate = std::max(max_rate, std::abs(dv[k]));
  PairPrediction p;
  p.valid_for = max_rate > 0.0 ? 1.0 / max_rate : kInf;
  long long images = 1;
  for (Eigen::Index k = 0; k < transverse; ++k) images *= 3;
  VecD d = d0;
  for (long long code = 0; code < images; ++code) {
    long long rest = code;
    for (Eigen::Index k = 2; k < d0.size(); ++k) {
      d[k] = d0[k] + 2.0 * static_cast<double>(rest % 3 - 1);
      rest /= 3;
    }
    const auto t = pair_time_raw(d, dv, reach);
    if (t && *t <= p.valid_for && (!p.dt || *t < *p.dt)) p.dt = t;
  }
  return p;
}

struct Candidate {
  double time{kInf};
  Event event;
};

}  // namespace

double CollisionLog::max_relative_ef_drift() const {
  double worst = 0.0;
  for (const LogEntry& e : entries_) {
    worst = std::max(worst, std::abs(e.ef_post - e.ef_pre) / (1.0 + std::abs(e.ef_pre)));
  }
  return worst;
}

double CollisionLog::max_ek() const {
  double worst = 0.0;
  for (const LogEntry& e : entries_) worst = std::max({worst, e.ek_pre, e.ek_post});
  return worst;
}

void CollisionLog::write_csv(std::ostream& os) const {
  os << "event_index,time,kind,i,j,EF_pre,EF_post,EK_pre,EK_post\n";
  std::ostringstream line;
  line.precision(17);
  for (const LogEntry& e : entries_) {
    line.str("");
    line << e.index << ',' << e.event.time << ','
         << (e.event.kind == EventKind::BallBall ? "ball_ball" : "ball_wall") << ','
         << e.event.i << ',' << e.event.j << ',' << e.ef_pre << ',' << e.ef_post << ','
         << e.ek_pre << ',' << e.ek_post << '\n';
    os << line.str();
  }
}

std::optional<double> time_to_pair_collision(const VecD& xi, const VecD& vi, double ri,
                                             const VecD& xj, const VecD& vj, double rj) {
  return pair_time_raw(xj - xi, vj - vi, ri + rj);
}

std::vector<WallHit> wall_hits(const Domain& dom, const VecD& x, const VecD& v, double r,
                               double t0, double omega) {
  std::vector<WallHit> hits;
  if (dom.kind() == DomainKind::Star) {
    hits.push_back({star_time(dom.star(), x, v, r, t0, omega), kLateralFace});
    return hits;
  }
  const double lateral = lateral_time(x, v, dom.rho() - r);
  if (std::isfinite(lateral)) hits.push_back({lateral, kLateralFace});
  if (dom.has_caps()) {
    const double ell = std::get<CylinderFinite>(dom.shape()).ell;
    for (Eigen::Index k = 2; k < x.size(); ++k) {
      const int base = 2 * static_cast<int>(k - 2);
      if (v[k] > 0.0) {
        hits.push_back({std::max((ell - r - x[k]) / v[k], 0.0), base + 1});
      } else if (v[k] < 0.0) {
        hits.push_back({std::max((-ell + r - x[k]) / v[k], 0.0), base + 2});
      }
    }
  }
  return hits;
}

double time_to_wall(const Domain& dom, const VecD& x, const VecD& v, double r, double t0,
                    double omega) {
  double best = kInf;
  for (const WallHit& h : wall_hits(dom, x, v, r, t0, omega)) best = std::min(best, h.dt);
  return best;
}

std::pair<VecD, VecD> resolve_ball_ball(const VecD& xi, const VecD& vi, double mi, const VecD& xj,
                                        const VecD& vj, double mj, double contact_distance) {
  const VecD d = xj - xi;
  const double dist = d.norm();
  if (std::abs(dist - contact_distance) > kContactTolerance * (1.0 + contact_distance) ||
      dist == 0.0) {
    throw Error(ErrorCode::NotInContact,
                "centre distance " + std::to_string(dist) + " vs " + std::to_string(contact_distance));
  }
  const VecD e = d / dist;
  const double ui = vi.dot(e);
  const double uj = vj.dot(e);
  if (uj - ui >= 0.0) throw Error(ErrorCode::NotApproaching, "balls are separating");
  const double m = mi + mj;
  const double ui_new = ((mi - mj) * ui + 2.0 * mj * uj) / m;
  const double uj_new = ((mj - mi) * uj + 2.0 * mi * ui) / m;
  return {vi + (ui_new - ui) * e, vj + (uj_new - uj) * e};
}

VecD specular_about(const WallContact& contact, const VecD& x, const VecD& v, double omega) {
  const VecD& n = contact.inward_normal;
  VecD u = relative_velocity(x, v, omega);
  const double un = u.dot(n);
  if (un > 1e-12 * u.norm()) {
    throw Error(ErrorCode::NotOutgoing, "frame-F velocity points into the domain");
  }
  u -= 2.0 * un * n;
  u[0] -= omega * x[1];
  u[1] += omega * x[0];
  return u;
}

VecD resolve_wall_specular(const Domain& dom, const VecD& x, const VecD& v, double t,
                           double omega, double r) {
  return specular_about(wall_point_and_normal(dom, x, t, omega, r), x, v, omega);
}

VecD SpecularLaw::reflect(const Domain& /*dom*/, const WallContact& contact, const VecD& x,
                          const VecD& v, double /*t*/, double omega) {
  return specular_about(contact, x, v, omega);
}

AdvanceResult advance(SystemState state, const Domain& dom, const FrameParams& fp,
                      double horizon, WallLaw& law, const AdvanceOptions& options) {
  fp.validate();
  for (const Ball& b : state.balls) {
    if (b.x.size() != dom.dim() || b.v.size() != dom.dim()) {
      throw Error(ErrorCode::InvalidArgument, "ball dimension does not match the domain");
    }
  }
  const bool torus = dom.kind() == DomainKind::Torus;
  const int n = static_cast<int>(state.balls.size());
  const double omega = fp.omega;
  AdvanceResult result;

  while (result.events < options.max_events) {
    const double t = state.time;
    Candidate first;
    Candidate second;
    double rescan = kInf;
    auto offer = [&](double time, const Event& ev) {
      if (time < first.time) {
        second = first;
        first = {time, ev};
      } else if (time < second.time) {
        second = {time, ev};
      }
    };
    for (int i = 0; i < n; ++i) {
      const Ball& b = state.balls[static_cast<std::size_t>(i)];
      for (const WallHit& h : wall_hits(dom, b.x, b.v, b.spec.radius, t, omega)) {
        offer(t + h.dt, Event{EventKind::BallWall, t + h.dt, i, -1, h.face});
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Ball& bi = state.balls[static_cast<std::size_t>(i)];
        const Ball& bj = state.balls[static_cast<std::size_t>(j)];
        const double reach = bi.spec.radius + bj.spec.radius;
        std::optional<double> dt;
        if (torus) {
          const PairPrediction p = torus_pair(separation(dom, bi.x, bj.x), bj.v - bi.v, reach);
          dt = p.dt;
          if (!dt) rescan = std::min(rescan, t + p.valid_for);
        } else {
          dt = pair_time_raw(bj.x - bi.x, bj.v - bi.v, reach);
        }
        if (dt) offer(t + *dt, Event{EventKind::BallBall, t + *dt, i, j, -1});
      }
    }

    const double next = std::min(first.time, rescan);
    if (next > horizon) {
      const double dt = horizon - t;
      if (std::isfinite(dt)) {
        for (Ball& b : state.balls) {
          b.x += dt * b.v;
          if (torus) b.x = wrap_torus(b.x);
        }
        state.time = horizon;
      }
      result.reached_horizon = true;
      break;
    }
    if (first.time <= rescan && second.time - first.time < options.tie_tolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "events at t=" << first.time << " and t=" << second.time << " (balls "
          << first.event.i << "," << first.event.j << " and " << second.event.i << ","
          << second.event.j << ")";
      throw Error(ErrorCode::SimultaneousCollision, msg.str());
    }

    const double dt = next - t;
    for (Ball& b : state.balls) {
      b.x += dt * b.v;
      if (torus) b.x = wrap_torus(b.x);
    }
    state.time = next;
    if (rescan < first.time) continue;

    const bool want_energy = options.record_log;
    EnergyBreakdown pre;
    if (want_energy) pre = energy_breakdown(state, fp);
    const Event& ev = first.event;
    if (ev.kind == EventKind::BallWall) {
      Ball& b = state.balls[static_cast<std::size_t>(ev.i)];
      const WallContact contact =
          wall_point_and_normal(dom, b.x, state.time, omega, b.spec.radius, ev.face);
      b.v = law.reflect(dom, contact, b.x, b.v, state.time, omega);
      b.x += options.nudge * contact.inward_normal;
    } else {
      Ball& bi = state.balls[static_cast<std::size_t>(ev.i)];
      Ball& bj = state.balls[static_cast<std::size_t>(ev.j)];
      const VecD d = separation(dom, bi.x, bj.x);
      auto [vi, vj] = resolve_ball_ball(bi.x, bi.v, bi.spec.mass, bi.x + d, bj.v, bj.spec.mass,
                                        bi.spec.radius + bj.spec.radius);
      bi.v = std::move(vi);
      bj.v = std::move(vj);
      const VecD e = d.normalized();
      bi.x -= options.nudge * e;
      bj.x += options.nudge * e;
      if (torus) bj.x = wrap_torus(bj.x);
      if (torus) bi.x = wrap_torus(bi.x);
    }
    if (want_energy) {
      const EnergyBreakdown post = energy_breakdown(state, fp);
      result.log.append({result.events, ev, pre.total_F, post.total_F, pre.kinetic_inertial,
                         post.kinetic_inertial});
    }
    ++result.events;
    if (options.on_event) options.on_event(ev, state);
    if (options.stop_requested && options.stop_requested()) break;
  }
  result.state = std::move(state);
  return result;
}

SystemState perturb_state(const SystemState& state, Rng& rng, double scale) {
  SystemState out = state;
  for (Ball& b : out.balls) {
    for (Eigen::Index k = 0; k < b.x.size(); ++k) b.x[k] += scale * (2.0 * rng.uniform() - 1.0);
    for (Eigen::Index k = 0; k < b.v.size(); ++k) b.v[k] += scale * (2.0 * rng.uniform() - 1.0);
  }
  return out;
}

double no_fermi_bound(const SystemState& state, const Domain& dom, const FrameParams& fp) {
  double mass = 0.0;
  for (const Ball& b : state.balls) mass += b.spec.mass;
  const double r = sup_h_radius(dom);
  return 2.0 * energy_breakdown(state, fp).total_F + 2.0 * mass * fp.omega * fp.omega * r * r;
}

}  // namespace rotodrum

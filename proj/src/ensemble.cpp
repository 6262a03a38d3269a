#include "rotodrum/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rotodrum/errors.hpp"
#include "rotodrum/lambertian.hpp"

namespace rotodrum {
namespace {

constexpr std::size_t kMaxConsecutiveRejections = 1'000'000;

struct SingleParticle {
  double m;
  double omega;
  double rho;
  double ell;
  int d;
  double e;
};

SingleParticle single_particle(const EnsembleParams& p) {
  if (p.balls.size() != 1 || p.balls[0].radius != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "closed forms need a single pointlike particle");
  }
  SingleParticle s{p.balls[0].mass, p.fp.omega, p.dom.rho(), 1.0, p.dom.dim(), p.ef};
  switch (p.dom.kind()) {
    case DomainKind::Disc:
    case DomainKind::Torus:
      break;
    case DomainKind::Cylinder:
      s.ell = std::get<CylinderFinite>(p.dom.shape()).ell;
      break;
    case DomainKind::Star:
      throw Error(ErrorCode::UnsupportedDomain, "closed forms need a cylinder, torus or disc");
  }
  if (s.e < 0.0 && !(s.e + 0.5 * s.m * s.omega * s.omega * s.rho * s.rho > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rho0 >= rho: the level set is empty");
  }
  if (s.e == 0.0 && s.omega == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "E^F = 0 with omega = 0 has no motion");
  }
  return s;
}

// B(d) / B(d-1) for unit-ball volumes.
double ball_ratio(int d) {
  return std::sqrt(std::numbers::pi) *
         std::exp(std::lgamma((d + 1) / 2.0) - std::lgamma(d / 2.0 + 1.0));
}

double h_angle(const VecD& a, const VecD& b) {
  return std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
}

VecD propose_position(const Domain& dom, Rng& rng) {
  const int d = dom.dim();
  VecD x(d);
  const double reach = sup_h_radius(dom);
  do {
    x[0] = reach * (2.0 * rng.uniform() - 1.0);
    x[1] = reach * (2.0 * rng.uniform() - 1.0);
  } while (h_norm2(x) > reach * reach);
  double half = 1.0;
  if (dom.kind() == DomainKind::Cylinder) half = std::get<CylinderFinite>(dom.shape()).ell;
  for (int k = 2; k < d; ++k) x[k] = half * (2.0 * rng.uniform() - 1.0);
  return x;
}

}  // namespace

double unit_ball_volume(int d) {
  return std::exp(0.5 * d * std::log(std::numbers::pi) - std::lgamma(d / 2.0 + 1.0));
}

SystemState sample_microcanonical(const EnsembleParams& p, Rng& rng) {
  p.fp.validate();
  if (p.balls.empty()) throw Error(ErrorCode::InvalidArgument, "no balls");
  if (p.fp.dim != p.dom.dim()) {
    throw Error(ErrorCode::InvalidArgument, "frame and domain dimensions differ");
  }
  const int d = p.dom.dim();
  const auto n = static_cast<int>(p.balls.size());
  const double w2 = p.fp.omega * p.fp.omega;
  const double reach = sup_h_radius(p.dom);
  double total_mass = 0.0;
  for (const BallSpec& b : p.balls) total_mass += b.mass;
  const double base_max = p.ef + 0.5 * total_mass * w2 * reach * reach;
  const double exponent = 0.5 * n * d - 1.0;
  if (!(base_max > 0.0)) {
    throw Error(ErrorCode::InfeasibleEnsemble, "E^F + M omega^2 R^2 / 2 <= 0");
  }

  SystemState state;
  state.balls.resize(p.balls.size());
  for (std::size_t k = 0; k < p.balls.size(); ++k) state.balls[k].spec = p.balls[k];
  double base = 0.0;
  std::size_t rejections = 0;
  while (true) {
    for (Ball& b : state.balls) b.x = propose_position(p.dom, rng);
    bool ok = admissible(p.dom, state.balls);
    if (ok) {
      base = p.ef;
      for (const Ball& b : state.balls) base += 0.5 * b.spec.mass * w2 * h_norm2(b.x);
      ok = base > 0.0 && (exponent == 0.0 || rng.uniform() < std::pow(base / base_max, exponent));
    }
    if (ok) break;
    if (++rejections >= kMaxConsecutiveRejections) {
      throw Error(ErrorCode::InfeasibleEnsemble,
                  "10^6 consecutive microcanonical proposals rejected");
    }
  }

  // (sqrt(m_k/2) v^F_k)_k is uniform on the sphere of radius sqrt(E^{F,K}).
  VecD g(n * d);
  double norm = 0.0;
  do {
    for (int i = 0; i < n * d; ++i) g[i] = rng.normal();
    norm = g.norm();
  } while (norm == 0.0);
  g *= std::sqrt(base) / norm;
  for (int k = 0; k < n; ++k) {
    Ball& b = state.balls[static_cast<std::size_t>(k)];
    VecD u = g.segment(k * d, d) * std::sqrt(2.0 / b.spec.mass);
    u[0] -= p.fp.omega * b.x[1];
    u[1] += p.fp.omega * b.x[0];
    b.v = std::move(u);
  }
  return state;
}

double inner_radius(const EnsembleParams& p) {
  if (p.ef >= 0.0 || p.fp.omega == 0.0) return 0.0;
  const double m = p.balls.at(0).mass;
  return std::sqrt(-2.0 * p.ef / (m * p.fp.omega * p.fp.omega));
}

double max_speed(const EnsembleParams& p) {
  const double m = p.balls.at(0).mass;
  const double rho = p.dom.rho();
  return std::sqrt(std::max(0.0, 2.0 * p.ef / m + p.fp.omega * p.fp.omega * rho * rho));
}

double theoretical_density(const VecD& z, const EnsembleParams& p) {
  const SingleParticle s = single_particle(p);
  if (z.size() != s.d) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  const double r2 = h_norm2(z);
  if (r2 > s.rho * s.rho) return 0.0;
  if (p.dom.kind() == DomainKind::Cylinder) {
    for (int k = 2; k < s.d; ++k) {
      if (std::abs(z[k]) > s.ell) return 0.0;
    }
  }
  const double cross = std::pow(2.0 * s.ell, s.d - 2);
  if (s.omega == 0.0) return 1.0 / (std::numbers::pi * s.rho * s.rho * cross);
  const double w2 = s.omega * s.omega;
  const double top = s.e + 0.5 * s.m * w2 * s.rho * s.rho;
  const double base = s.e + 0.5 * s.m * w2 * r2;
  if (s.e < 0.0 && base <= 0.0) return 0.0;
  const double half = 0.5 * s.d;
  // Denominator written as top^(d/2) * (1 - q^(d/2)) with q = E/top.
  double tail = 1.0;
  if (s.e > 0.0) tail = -std::expm1(half * std::log(s.e / top));
  const double prefactor = s.d * s.m * w2 / (4.0 * cross * std::numbers::pi);
  return prefactor * std::pow(base / top, half - 1.0) / (top * tail);
}

std::vector<double> theoretical_r2_bin_masses(const EnsembleParams& p, int bins) {
  const SingleParticle s = single_particle(p);
  if (bins < 1) throw Error(ErrorCode::InvalidArgument, "bins must be positive");
  std::vector<double> out(static_cast<std::size_t>(bins));
  const double rho2 = s.rho * s.rho;
  if (s.omega == 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / bins);
    return out;
  }
  const double k = 0.5 * s.m * s.omega * s.omega;
  const double top = s.e + k * rho2;
  const double half = 0.5 * s.d;
  // Cumulative mass in s = r^2 is proportional to ((E + k s) / top)^(d/2).
  auto cumulative = [&](double sq) {
    const double base = std::max(0.0, s.e + k * sq);
    return std::pow(base / top, half);
  };
  const double total = 1.0 - cumulative(0.0);
  for (int i = 0; i < bins; ++i) {
    const double lo = rho2 * i / bins;
    const double hi = rho2 * (i + 1) / bins;
    out[static_cast<std::size_t>(i)] = (cumulative(hi) - cumulative(lo)) / total;
  }
  return out;
}

double theoretical_mean_flight(const EnsembleParams& p) {
  const SingleParticle s = single_particle(p);
  const double ratio = ball_ratio(s.d);
  if (s.omega == 0.0) {
    const double v = std::sqrt(2.0 * s.e / s.m);
    return ratio * s.d * s.rho / (2.0 * v);
  }
  const double w2 = s.omega * s.omega;
  const double v_star = std::sqrt(2.0 * s.e / s.m + w2 * s.rho * s.rho);
  double factor = 1.0;
  if (s.e > 0.0) {
    const double top = s.e + 0.5 * s.m * w2 * s.rho * s.rho;
    factor = -std::expm1(0.5 * s.d * std::log(s.e / top));
  }
  return ratio * v_star / (w2 * s.rho) * factor;
}

double large_d_mean_flight(const EnsembleParams& p) {
  const SingleParticle s = single_particle(p);
  const double v_star = std::sqrt(2.0 * s.e / s.m + s.omega * s.omega * s.rho * s.rho);
  return std::sqrt(2.0 * std::numbers::pi) * v_star /
         (s.omega * s.omega * s.rho * std::sqrt(static_cast<double>(s.d)));
}

TheoryValues theory_values(const EnsembleParams& p) {
  TheoryValues t;
  t.mean_flight = theoretical_mean_flight(p);
  t.rho0 = inner_radius(p);
  t.v_star = max_speed(p);
  return t;
}

FlightStats run_knudsen(const EnsembleParams& p, const KnudsenOptions& opts, Rng& rng) {
  single_particle(p);
  Rng sampler = rng.split(0);
  Rng walls = rng.split(1);
  SystemState start = sample_microcanonical(p, sampler);
  MixedLaw law(walls, true, opts.lambertian_caps);
  const double m = p.balls[0].mass;
  const double omega = p.fp.omega;
  auto energy = [&](const VecD& x, const VecD& v) {
    return 0.5 * m * relative_velocity(x, v, omega).squaredNorm() -
           0.5 * m * omega * omega * h_norm2(x);
  };
  const double ef0 = energy(start.balls[0].x, start.balls[0].v);

  FlightStats st;
  double theta = 0.0;
  VecD prev_x = start.balls[0].x;
  VecD prev_v = start.balls[0].v;
  double prev_t = start.time;
  bool seen_lateral = false;
  double last_lateral = 0.0;
  double theta_at_last = 0.0;
  std::size_t flights = 0;
  double next_sample = start.time + opts.sample_interval;

  auto emit_samples = [&](double until) {
    if (opts.sample_interval <= 0.0) return;
    while (next_sample <= until && next_sample <= opts.total_time) {
      const VecD pos = prev_x + (next_sample - prev_t) * prev_v;
      st.sample_times.push_back(next_sample);
      st.sample_radii.push_back(std::sqrt(h_norm2(pos)));
      st.sample_theta.push_back(theta + h_angle(prev_x, pos));
      next_sample += opts.sample_interval;
    }
  };

  AdvanceOptions ao;
  ao.record_log = false;
  ao.on_event = [&](const Event& ev, const SystemState& s) {
    const VecD& x = s.balls[0].x;
    emit_samples(ev.time);
    theta += h_angle(prev_x, x);
    ++st.reflections;
    const double ef = energy(x, s.balls[0].v);
    st.max_ef_drift = std::max(st.max_ef_drift, std::abs(ef - ef0) / (1.0 + std::abs(ef0)));
    if (ev.face == kLateralFace) {
      if (seen_lateral) {
        const double duration = ev.time - last_lateral;
        st.durations.add(duration);
        if (opts.record_flights) st.flights.push_back({duration, theta_at_last, theta, ef});
        ++flights;
      }
      seen_lateral = true;
      last_lateral = ev.time;
      theta_at_last = theta;
    }
    prev_x = x;
    prev_v = s.balls[0].v;
    prev_t = ev.time;
  };
  ao.stop_requested = [&] { return opts.max_flights > 0 && flights >= opts.max_flights; };

  const AdvanceResult res = advance(start, p.dom, p.fp, opts.total_time, law, ao);
  if (res.reached_horizon) {
    emit_samples(opts.total_time);
    theta += h_angle(prev_x, res.state.balls[0].x);
  }
  st.total_time = res.state.time - start.time;
  st.theta_final = theta;
  return st;
}

double winding_rate(const FlightStats& stats) {
  if (stats.total_time <= 0.0) throw Error(ErrorCode::InsufficientData, "empty run");
  return stats.theta_final / stats.total_time;
}

bool theta_strictly_increasing(const FlightStats& stats) {
  for (std::size_t i = 1; i < stats.sample_theta.size(); ++i) {
    if (!(stats.sample_theta[i] > stats.sample_theta[i - 1])) return false;
  }
  return true;
}

InvarianceReport invariance_test(const EnsembleParams& p, double T, std::size_t n_samples,
                                 Rng& rng, ReflectionKind law) {
  std::vector<double> r0, r1, s0, s1;
  const double omega = p.fp.omega;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng sampler = rng.split(2 * i);
    Rng walls = rng.split(2 * i + 1);
    const SystemState start = sample_microcanonical(p, sampler);
    for (const Ball& b : start.balls) {
      r0.push_back(std::sqrt(h_norm2(b.x)));
      s0.push_back(relative_velocity(b.x, b.v, omega).norm());
    }
    SpecularLaw specular;
    LambertianLaw lambertian(walls);
    WallLaw& chosen = law == ReflectionKind::Specular ? static_cast<WallLaw&>(specular)
                                                      : static_cast<WallLaw&>(lambertian);
    AdvanceOptions ao;
    ao.record_log = false;
    const AdvanceResult res = advance(start, p.dom, p.fp, start.time + T, chosen, ao);
    for (const Ball& b : res.state.balls) {
      r1.push_back(std::sqrt(h_norm2(b.x)));
      s1.push_back(relative_velocity(b.x, b.v, omega).norm());
    }
  }
  InvarianceReport rep;
  rep.samples = n_samples;
  rep.ks_radius = ks_two_sample(r0, r1);
  rep.ks_speed = ks_two_sample(s0, s1);
  return rep;
}

}  // namespace rotodrum

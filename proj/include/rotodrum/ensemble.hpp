#pragma once

#include <cstddef>
#include <vector>

#include "rotodrum/domain.hpp"
#include "rotodrum/dynamics.hpp"
#include "rotodrum/random.hpp"
#include "rotodrum/stats.hpp"

namespace rotodrum {

struct EnsembleParams {
  double ef{1.0};
  std::vector<BallSpec> balls{BallSpec{}};
  Domain dom{Disc2D{}};
  FrameParams fp{};
};

/// Microcanonical draw on the level set E^F = p.ef at time 0 (frames coincide).
SystemState sample_microcanonical(const EnsembleParams& p, Rng& rng);

/// rho0 = sqrt(-2 E^F / (m omega^2)) for E^F < 0, else 0 (mass of the first ball).
double inner_radius(const EnsembleParams& p);

/// Maximum frame-F speed, reached on the lateral wall.
double max_speed(const EnsembleParams& p);

/// Unit ball volume pi^(d/2) / Gamma(d/2 + 1).
double unit_ball_volume(int d);

/// Stationary density of a single pointlike Knudsen particle at z, with respect
/// to Lebesgue measure on the domain (the torus uses ell = 1).
double theoretical_density(const VecD& z, const EnsembleParams& p);

/// Stationary probability of each of `bins` equal-width bins in r^2 over
/// [0, rho^2], in closed form.
std::vector<double> theoretical_r2_bin_masses(const EnsembleParams& p, int bins);

/// Closed-form mean flight time between lateral-wall reflections.
double theoretical_mean_flight(const EnsembleParams& p);

/// Asymptotic large-d mean flight time sqrt(2 pi) v* / (omega^2 rho sqrt(d)).
double large_d_mean_flight(const EnsembleParams& p);

struct TheoryValues {
  double mean_flight{0.0};
  double rho0{0.0};
  double v_star{0.0};
};

TheoryValues theory_values(const EnsembleParams& p);

struct FlightRecord {
  double duration{0.0};
  double theta_start{0.0};
  double theta_end{0.0};
  double ef{0.0};
};

struct FlightStats {
  std::vector<FlightRecord> flights;
  RunningStats durations;
  std::vector<double> sample_times;
  std::vector<double> sample_radii;
  std::vector<double> sample_theta;
  std::size_t reflections{0};
  double total_time{0.0};
  double theta_final{0.0};  // unwrapped inertial angle at total_time minus its start
  double max_ef_drift{0.0};
};

struct KnudsenOptions {
  double total_time{1e300};
  std::size_t max_flights{0};  // 0 = no limit
  double sample_interval{0.0};  // 0 = no time samples
  bool lambertian_caps{false};
  bool record_flights{true};
};

/// Single pointlike particle with Lambertian lateral wall, started from the
/// microcanonical ensemble. Flights run between consecutive lateral-wall
/// reflections; the partial flights at both ends are discarded.
FlightStats run_knudsen(const EnsembleParams& p, const KnudsenOptions& opts, Rng& rng);

/// Theta(T) / T.
double winding_rate(const FlightStats& stats);

/// True iff the sampled unwrapped angle increases strictly.
bool theta_strictly_increasing(const FlightStats& stats);

struct InvarianceReport {
  double ks_radius{0.0};
  double ks_speed{0.0};
  std::size_t samples{0};
};

enum class ReflectionKind { Specular, Lambertian };

/// Draws n_samples microcanonical states, evolves each for time T and compares
/// the pooled marginals of |x^H| and frame-F speed before and after.
InvarianceReport invariance_test(const EnsembleParams& p, double T, std::size_t n_samples,
                                 Rng& rng, ReflectionKind law);

}  // namespace rotodrum

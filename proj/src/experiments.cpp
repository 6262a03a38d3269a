#include "rotodrum/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rotodrum/dynamics.hpp"
#include "rotodrum/ensemble.hpp"
#include "rotodrum/gravity.hpp"
#include "rotodrum/lambertian.hpp"

#ifndef ROTODRUM_VERSION
#define ROTODRUM_VERSION "0.0.0"
#endif

namespace rotodrum {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EnsembleParams ensemble_params(const ExperimentConfig& cfg) {
  EnsembleParams p;
  p.ef = cfg.ef;
  p.balls.clear();
  for (std::size_t i = 0; i < cfg.masses.size(); ++i) {
    p.balls.push_back({cfg.masses[i], cfg.radii[i]});
  }
  p.dom = cfg.domain.build();
  p.fp = FrameParams{cfg.omega, p.dom.dim()};
  return p;
}

// Runs fn(0..n-1) on up to `threads` workers; results keep index order.
template <class T>
std::vector<T> run_chunks(std::size_t n, int threads, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::optional<double> try_mean_flight(const EnsembleParams& p) {
  try {
    return theoretical_mean_flight(p);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::filesystem::path artifact(const ExperimentConfig& cfg, RunReport& rep, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  rep.artifacts.push_back(name);
  return std::filesystem::path(cfg.out_dir) / name;
}

Estimate point_estimate(std::string name, double value, std::size_t n,
                        std::optional<double> theory = std::nullopt) {
  Estimate e;
  e.name = std::move(name);
  e.value = value;
  e.samples = n;
  e.theory = theory;
  return e;
}

// Shared by conservation and no_fermi_bound.
void run_collisions(const ExperimentConfig& cfg, RunReport& rep) {
  const EnsembleParams p = ensemble_params(cfg);
  const Rng root(cfg.seed);
  Rng sampler = root.split(0);
  const SystemState initial = sample_microcanonical(p, sampler);
  SpecularLaw law;
  AdvanceOptions opts;
  opts.max_events = cfg.run.events;
  const double horizon = cfg.run.time > 0.0 ? cfg.run.time : kInf;

  SystemState start = initial;
  AdvanceResult res;
  for (int attempt = 0;; ++attempt) {
    try {
      res = advance(start, p.dom, p.fp, horizon, law, opts);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SimultaneousCollision || !cfg.run.perturb_on_tie || attempt >= 5) {
        throw;
      }
      Rng jitter = root.split(100 + static_cast<std::uint64_t>(attempt));
      start = perturb_state(initial, jitter, 1e-9);
    }
  }

  const double ef0 = energy_breakdown(start, p.fp).total_F;
  const double bound = no_fermi_bound(start, p.dom, p.fp);
  const CollisionLog& log = res.log;
  double cumulative = 0.0;
  double worst_excess = -kInf;
  for (const LogEntry& e : log.entries()) {
    cumulative = std::max(cumulative, std::abs(e.ef_post - ef0) / (1.0 + std::abs(ef0)));
    worst_excess = std::max({worst_excess, e.ek_pre - bound, e.ek_post - bound});
  }
  const double per_event = log.max_relative_ef_drift();
  rep.theory["EF"] = ef0;
  rep.theory["no_fermi_bound"] = bound;
  rep.estimates.push_back(point_estimate("max_event_ef_drift", per_event, log.size()));
  rep.estimates.push_back(point_estimate("cumulative_ef_drift", cumulative, log.size()));
  rep.estimates.push_back(point_estimate("max_ek", log.max_ek(), log.size(), bound));
  rep.estimates.push_back(point_estimate("max_ek_minus_bound", worst_excess, log.size()));

  if (cfg.experiment == "conservation") {
    rep.criteria.push_back({"per_event_ef_drift", per_event < 1e-9, fmt(per_event) + " < 1e-9"});
    rep.criteria.push_back({"cumulative_ef_drift", cumulative < 1e-6, fmt(cumulative) + " < 1e-6"});
  } else {
    rep.criteria.push_back(
        {"ek_below_bound", worst_excess <= 1e-9, "max(EK - bound) = " + fmt(worst_excess)});
  }
  if (!cfg.out_dir.empty()) {
    std::ofstream os(artifact(cfg, rep, "collision_log.csv"));
    log.write_csv(os);
  }
}

// With sample_target > 0 each replica runs for its share of
// sample_target * sample_interval (unless run.time is set) instead of a flight count.
std::vector<FlightStats> knudsen_chunks(const ExperimentConfig& cfg, const EnsembleParams& p,
                                        double sample_interval, std::size_t sample_target = 0) {
  const std::size_t chunks = cfg.run.replicas;
  const Rng root(cfg.seed);
  const bool keep = cfg.write_flights && !cfg.out_dir.empty();
  return run_chunks<FlightStats>(chunks, cfg.threads, [&](std::size_t i) {
    KnudsenOptions o;
    o.max_flights = cfg.run.flights / chunks + (i < cfg.run.flights % chunks ? 1 : 0);
    o.total_time = cfg.run.time > 0.0 ? cfg.run.time / static_cast<double>(chunks) : kInf;
    if (sample_target > 0 && cfg.run.time <= 0.0) {
      const std::size_t share = sample_target / chunks + (i < sample_target % chunks ? 1 : 0);
      o.max_flights = 0;
      o.total_time = (static_cast<double>(share) + 0.5) * sample_interval;
    }
    o.sample_interval = sample_interval;
    o.lambertian_caps = cfg.run.lambertian_caps;
    o.record_flights = keep;
    Rng rng = root.split(i);
    return run_knudsen(p, o, rng);
  });
}

void write_flights(const ExperimentConfig& cfg, RunReport& rep,
                   const std::vector<FlightStats>& chunks) {
  if (cfg.out_dir.empty() || !cfg.write_flights) return;
  std::ofstream os(artifact(cfg, rep, "flights.csv"));
  os << "replica,duration,theta_start,theta_end,EF\n";
  os.precision(17);
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    for (const FlightRecord& f : chunks[c].flights) {
      os << c << ',' << f.duration << ',' << f.theta_start << ',' << f.theta_end << ',' << f.ef
         << '\n';
    }
  }
}

void run_knudsen_flight(const ExperimentConfig& cfg, RunReport& rep) {
  const EnsembleParams p = ensemble_params(cfg);
  const auto chunks = knudsen_chunks(cfg, p, cfg.run.sample_interval);
  RunningStats durations;
  for (const FlightStats& s : chunks) durations.merge(s.durations);
  const std::optional<double> theory = try_mean_flight(p);
  if (theory) rep.theory["mean_flight"] = *theory;
  rep.theory["v_star"] = max_speed(p);
  const Estimate e = make_estimate("mean_flight", durations, theory);
  rep.estimates.push_back(e);
  if (theory) {
    const double rel = std::abs(e.value - *theory) / *theory;
    rep.criteria.push_back({"mean_flight_within_1pct", rel < 0.01, "relative error " + fmt(rel)});
    rep.criteria.push_back({"mean_flight_within_3se", std::abs(*e.z_score) < 3.0,
                            "z = " + fmt(*e.z_score)});
  }
  write_flights(cfg, rep, chunks);
}

void run_stationary_density(const ExperimentConfig& cfg, RunReport& rep) {
  const EnsembleParams p = ensemble_params(cfg);
  const double mean_flight = theoretical_mean_flight(p);
  const double interval = cfg.run.sample_interval > 0.0 ? cfg.run.sample_interval : mean_flight;
  const auto chunks = knudsen_chunks(cfg, p, interval, cfg.run.samples);
  std::vector<double> radii;
  for (const FlightStats& s : chunks) {
    radii.insert(radii.end(), s.sample_radii.begin(), s.sample_radii.end());
  }
  constexpr int kBins = 50;
  const double rho = p.dom.rho();
  const double rho0 = inner_radius(p);
  const std::vector<double> empirical = r2_histogram(radii, 0.0, rho, kBins);
  const std::vector<double> theory = theoretical_r2_bin_masses(p, kBins);
  const double l1 = l1_distance(empirical, theory);
  const auto below = static_cast<std::size_t>(std::count_if(
      radii.begin(), radii.end(), [&](double r) { return r < rho0 - 1e-9; }));
  rep.theory["rho0"] = rho0;
  rep.theory["mean_flight"] = mean_flight;
  rep.estimates.push_back(point_estimate("density_l1", l1, radii.size()));
  rep.estimates.push_back(point_estimate("samples_below_rho0", static_cast<double>(below), radii.size()));
  rep.criteria.push_back({"density_l1_below_0.02", l1 < 0.02, "L1 = " + fmt(l1)});
  rep.criteria.push_back({"no_samples_below_rho0", below == 0, std::to_string(below) + " samples"});
  if (!cfg.out_dir.empty()) {
    std::ofstream os(artifact(cfg, rep, "density.csv"));
    os << "r2_lo,r2_hi,empirical,theory\n";
    os.precision(17);
    for (int i = 0; i < kBins; ++i) {
      os << rho * rho * i / kBins << ',' << rho * rho * (i + 1) / kBins << ','
         << empirical[static_cast<std::size_t>(i)] << ',' << theory[static_cast<std::size_t>(i)]
         << '\n';
    }
  }
  write_flights(cfg, rep, chunks);
}

void run_winding(const ExperimentConfig& cfg, RunReport& rep) {
  const EnsembleParams p = ensemble_params(cfg);
  double interval = cfg.run.sample_interval;
  if (interval <= 0.0 && cfg.ef < 0.0) {
    const auto mf = try_mean_flight(p);
    interval = mf ? 0.25 * *mf : 0.1;
  }
  const auto chunks = knudsen_chunks(cfg, p, interval);
  double theta = 0.0;
  double time = 0.0;
  std::size_t flights = 0;
  RunningStats rates;
  bool increasing = true;
  for (const FlightStats& s : chunks) {
    theta += s.theta_final;
    time += s.total_time;
    flights += s.durations.count();
    rates.add(winding_rate(s));
    increasing = increasing && theta_strictly_increasing(s);
  }
  const double rate = theta / time;
  Estimate e = point_estimate("winding_rate", rate, flights, cfg.omega);
  e.standard_error = rates.count() > 1 ? rates.standard_error() : 0.0;
  if (e.standard_error > 0.0) e.z_score = (rate - cfg.omega) / e.standard_error;
  rep.estimates.push_back(e);
  rep.theory["omega"] = cfg.omega;
  const double err = std::abs(rate - cfg.omega);
  rep.criteria.push_back({"winding_within_2pct", err <= 0.02 * cfg.omega,
                          "|rate - omega| = " + fmt(err) + " over " + std::to_string(flights) +
                              " flights"});
  if (cfg.ef < 0.0) {
    rep.criteria.push_back({"theta_strictly_increasing", increasing, increasing ? "yes" : "no"});
  }
  write_flights(cfg, rep, chunks);
}

void run_invariance(const ExperimentConfig& cfg, RunReport& rep) {
  const EnsembleParams p = ensemble_params(cfg);
  const bool pointlike = p.balls.size() == 1 && p.balls[0].radius == 0.0;
  double horizon = cfg.run.time;
  if (horizon <= 0.0) {
    const auto mf = pointlike ? try_mean_flight(p) : std::nullopt;
    horizon = mf ? 10.0 * *mf : 2.0;
  }
  Rng rng(cfg.seed);
  const InvarianceReport r = invariance_test(
      p, horizon, cfg.run.samples, rng,
      pointlike ? ReflectionKind::Lambertian : ReflectionKind::Specular);
  const double limit = pointlike ? 0.01 : 0.02;
  rep.theory["horizon"] = horizon;
  rep.estimates.push_back(point_estimate("ks_radius", r.ks_radius, r.samples));
  rep.estimates.push_back(point_estimate("ks_speed", r.ks_speed, r.samples));
  rep.criteria.push_back({"ks_radius", r.ks_radius < limit, fmt(r.ks_radius) + " < " + fmt(limit)});
  rep.criteria.push_back({"ks_speed", r.ks_speed < limit, fmt(r.ks_speed) + " < " + fmt(limit)});
}

double period_two_deviation(const std::vector<BounceRecord>& records) {
  double total = 0.0;
  for (std::size_t k = 0; k + 2 < records.size(); ++k) {
    total += (records[k + 2].v_pre - records[k].v_pre).norm();
    total += (records[k + 2].v_post - records[k].v_post).norm();
  }
  return total;
}

void run_gravity_bounce(const ExperimentConfig& cfg, RunReport& rep) {
  BouncePoints bp{cfg.gravity.p1, cfg.gravity.p2, cfg.gravity.g, cfg.omega};
  const BounceSequence seq = iterate_bounces(bp, cfg.gravity.initial_speed, cfg.gravity.bounces);
  const double c1 = growth_constant(bp);
  rep.theory["c1"] = c1;
  rep.estimates.push_back(
      point_estimate("bounces", static_cast<double>(seq.records.size()), seq.records.size()));
  rep.estimates.push_back(point_estimate("ambiguous_branch", seq.ambiguous_branch ? 1.0 : 0.0,
                                         seq.records.size()));
  if (std::abs(bp.p1.x() + bp.p2.x()) <= 1e-12 || bp.vertical()) {
    const double dev = period_two_deviation(seq.records);
    rep.estimates.push_back(point_estimate("period_two_deviation", dev, seq.records.size(), 0.0));
    rep.criteria.push_back({"period_two", dev < 1e-9, "accumulated " + fmt(dev)});
  } else if (seq.records.size() >= 1000) {
    const AsymptoticsFit fit = fit_asymptotics(seq.records, bp);
    const double prefactor = std::cbrt(1.5 * std::abs(c1));
    const double slope = bp.g * bp.omega * std::abs(bp.p1.x() + bp.p2.x());
    rep.theory["velocity_prefactor"] = prefactor;
    rep.theory["energy_slope"] = slope;
    const std::size_t n = fit.samples;
    rep.estimates.push_back(point_estimate("exponent", fit.exponent, n, 1.0 / 3.0));
    rep.estimates.push_back(point_estimate("prefactor", fit.prefactor, n, prefactor));
    rep.estimates.push_back(point_estimate("cube_slope", fit.cube_slope, n, 1.5 * std::abs(c1)));
    rep.estimates.push_back(point_estimate("shifted_exponent", fit.shifted_exponent, n, 1.0 / 3.0));
    rep.estimates.push_back(point_estimate("shifted_prefactor", fit.shifted_prefactor, n, prefactor));
    rep.estimates.push_back(point_estimate("energy_slope", fit.energy_slope, n, slope));
    rep.criteria.push_back({"exponent", std::abs(fit.exponent - 1.0 / 3.0) <= 0.01,
                            "fitted " + fmt(fit.exponent)});
    rep.criteria.push_back({"prefactor", std::abs(fit.prefactor / prefactor - 1.0) <= 0.03,
                            "fitted " + fmt(fit.prefactor) + " vs " + fmt(prefactor)});
    rep.criteria.push_back({"energy_slope", std::abs(fit.energy_slope / slope - 1.0) <= 0.05,
                            "fitted " + fmt(fit.energy_slope) + " vs " + fmt(slope)});
  }
  if (!cfg.out_dir.empty()) {
    std::ofstream os(artifact(cfg, rep, "bounces.csv"));
    write_bounce_csv(os, seq.records);
  }
}

void run_gravity_lambertian(const ExperimentConfig& cfg, RunReport& rep) {
  const Rng root(cfg.seed);
  const GravitySpec& gs = cfg.gravity;
  const auto traces = run_chunks<EnergyTrace>(gs.seeds, cfg.threads, [&](std::size_t i) {
    Rng rng = root.split(i);
    return lambertian_gravity_run(cfg.domain.rho, cfg.omega, gs.g, gs.start, gs.v_init, gs.events,
                                  rng);
  });
  std::size_t exceeded = 0;
  double drift = 0.0;
  for (const EnergyTrace& t : traces) {
    if (t.max_ek > 4.0 * t.initial_ek) ++exceeded;
    drift = std::max(drift, t.max_speed_drift);
  }
  const double fraction = traces.empty() ? 0.0 : static_cast<double>(exceeded) / traces.size();
  Estimate e = point_estimate("fraction_exceeding_4x", fraction, traces.size());
  if (!traces.empty()) e.standard_error = std::sqrt(fraction * (1.0 - fraction) / traces.size());
  rep.estimates.push_back(e);
  rep.estimates.push_back(point_estimate("max_frame_speed_drift", drift, traces.size()));
  rep.criteria.push_back({"some_run_exceeds_4x", fraction > 0.0,
                          std::to_string(exceeded) + " of " + std::to_string(traces.size())});
  if (!cfg.out_dir.empty()) {
    std::ofstream os(artifact(cfg, rep, "lambertian_gravity.csv"));
    os << "seed_index,initial_EK,max_EK,exceeded_4x\n";
    os.precision(17);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      os << i << ',' << traces[i].initial_ek << ',' << traces[i].max_ek << ','
         << (traces[i].max_ek > 4.0 * traces[i].initial_ek ? 1 : 0) << '\n';
    }
  }
}

}  // namespace

std::string_view version_string() { return ROTODRUM_VERSION; }

bool RunReport::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass; });
}

const Estimate* RunReport::find(std::string_view name) const {
  for (const Estimate& e : estimates) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["version"] = version;
  j["config"] = config;
  j["theory"] = theory;
  j["estimates"] = nlohmann::json::array();
  for (const Estimate& e : estimates) {
    nlohmann::json je{{"name", e.name},
                      {"value", e.value},
                      {"standard_error", e.standard_error},
                      {"samples", e.samples}};
    je["theory"] = e.theory ? nlohmann::json(*e.theory) : nlohmann::json(nullptr);
    je["z_score"] = e.z_score ? nlohmann::json(*e.z_score) : nlohmann::json(nullptr);
    j["estimates"].push_back(je);
  }
  j["criteria"] = nlohmann::json::array();
  for (const CriterionResult& c : criteria) {
    j["criteria"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  j["all_pass"] = all_pass();
  j["artifacts"] = artifacts;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2);
}

Estimate make_estimate(std::string name, const RunningStats& stats, std::optional<double> theory) {
  Estimate e;
  e.name = std::move(name);
  e.value = stats.mean();
  e.standard_error = stats.count() > 1 ? stats.standard_error() : 0.0;
  e.samples = stats.count();
  e.theory = theory;
  if (theory && e.standard_error > 0.0) e.z_score = (e.value - *theory) / e.standard_error;
  return e;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.experiment = cfg.experiment;
  rep.config = cfg.echo;
  rep.version = std::string(version_string());
  const std::string& e = cfg.experiment;
  if (e == "conservation" || e == "no_fermi_bound") {
    run_collisions(cfg, rep);
  } else if (e == "knudsen_flight") {
    run_knudsen_flight(cfg, rep);
  } else if (e == "stationary_density") {
    run_stationary_density(cfg, rep);
  } else if (e == "winding") {
    run_winding(cfg, rep);
  } else if (e == "microcanonical_invariance") {
    run_invariance(cfg, rep);
  } else if (e == "gravity_bounce") {
    run_gravity_bounce(cfg, rep);
  } else if (e == "gravity_lambertian") {
    run_gravity_lambertian(cfg, rep);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + e + "'");
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!cfg.out_dir.empty()) {
    std::ofstream os(artifact(cfg, rep, "report.json"));
    os << rep.to_json() << '\n';
  }
  return rep;
}

}  // namespace rotodrum

// Command-line front end: run experiments, list them, evaluate closed forms.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rotodrum/config.hpp"
#include "rotodrum/ensemble.hpp"
#include "rotodrum/errors.hpp"
#include "rotodrum/experiments.hpp"
#include "rotodrum/gravity.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

const std::map<std::string, std::string>& experiment_blurbs() {
  static const std::map<std::string, std::string> blurbs = {
      {"conservation", "hard balls in a rotating drum; per-event and cumulative E^F drift"},
      {"no_fermi_bound", "same dynamics; inertial kinetic energy against 2E^F + 2M omega^2 R^2"},
      {"knudsen_flight", "Lambertian particle; mean flight time against the closed form"},
      {"stationary_density", "time-sampled radial histogram against the stationary density"},
      {"winding", "unwrapped angle growth rate against omega"},
      {"microcanonical_invariance", "KS distance between initial and evolved marginals"},
      {"gravity_bounce", "two-point bounce sequence under gravity; growth laws or periodicity"},
      {"gravity_lambertian", "Lambertian reflections under gravity; energy excursions over seeds"},
  };
  return blurbs;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& args) {
  std::map<std::string, double> out;
  for (const std::string& a : args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      throw rotodrum::Error(rotodrum::ErrorCode::ParseError, "expected key=value, got '" + a + "'");
    }
    try {
      out[a.substr(0, eq)] = std::stod(a.substr(eq + 1));
    } catch (const std::exception&) {
      throw rotodrum::Error(rotodrum::ErrorCode::ParseError, "not a number: '" + a + "'");
    }
  }
  return out;
}

double get(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double evaluate_theory(const std::string& formula, const std::map<std::string, double>& p) {
  using namespace rotodrum;
  if (formula == "delta0" || formula == "delta2" || formula == "c1") {
    BouncePoints bp;
    bp.p1 = Vec2(get(p, "x1", 0.0), get(p, "y1", 1.0));
    bp.p2 = Vec2(get(p, "x2", 1.0), get(p, "y2", 0.0));
    bp.g = get(p, "g", 1.0);
    bp.omega = get(p, "omega", 1.0);
    bp.validate();
    if (formula == "delta0") return delta0(bp);
    if (formula == "delta2") return delta2(bp, get(p, "at_p2", 1.0) != 0.0);
    return growth_constant(bp);
  }
  const int d = static_cast<int>(get(p, "d", 2.0));
  const double rho = get(p, "rho", 1.0);
  EnsembleParams ep;
  ep.ef = get(p, "ef", 0.5);
  ep.balls = {BallSpec{get(p, "m", 1.0), 0.0}};
  if (d == 2) {
    ep.dom = Domain(Disc2D{rho});
  } else if (p.count("ell")) {
    ep.dom = Domain(CylinderFinite{rho, get(p, "ell", 1.0), d});
  } else {
    ep.dom = Domain(CylinderTorus{rho, d});
  }
  ep.fp = FrameParams{get(p, "omega", 1.0), d};
  if (formula == "mean_flight") return theoretical_mean_flight(ep);
  if (formula == "large_d") return large_d_mean_flight(ep);
  if (formula == "v_star") return max_speed(ep);
  if (formula == "rho0") return inner_radius(ep);
  if (formula == "density") {
    VecD z = VecD::Zero(d);
    z[0] = get(p, "r", 0.0);
    return theoretical_density(z, ep);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown formula '" + formula + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotodrum: billiards in rotating drums"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rotodrum::version_string()));

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int threads = 0;
  bool perturb = false;
  run->add_option("config", config_path, "config file (key = value or JSON)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--perturb-on-tie", perturb, "perturb by 1e-9 and retry on simultaneous events");

  app.add_subcommand("list-experiments", "list experiment names");

  auto* theory = app.add_subcommand("theory", "evaluate a closed-form value");
  std::string formula;
  std::vector<std::string> params;
  theory
      ->add_option("formula", formula,
                   "mean_flight | large_d | v_star | rho0 | density | delta0 | delta2 | c1")
      ->required();
  theory->add_option("params", params, "key=value pairs (d, ef, omega, rho, ell, m, r, x1, ...)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-experiments")) {
      for (const std::string& name : rotodrum::experiment_names()) {
        std::cout << name << "\t" << experiment_blurbs().at(name) << "\n";
      }
      return kExitPass;
    }
    if (app.got_subcommand("theory")) {
      std::printf("%.17g\n", evaluate_theory(formula, parse_params(params)));
      return kExitPass;
    }

    rotodrum::ExperimentConfig cfg;
    try {
      std::ifstream in(config_path);
      if (!in) throw rotodrum::Error(rotodrum::ErrorCode::ParseError, "cannot open " + config_path);
      std::ostringstream text;
      text << in.rdbuf();
      auto keys = rotodrum::parse_key_values(text.str());
      if (*seed_opt) keys["seed"] = std::to_string(seed);
      if (!out_dir.empty()) keys["output.dir"] = out_dir;
      if (threads > 0) keys["threads"] = std::to_string(threads);
      if (perturb) keys["run.perturb_on_tie"] = "true";
      cfg = rotodrum::config_from_keys(keys);
    } catch (const rotodrum::Error& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }

    const rotodrum::RunReport report = rotodrum::run_experiment(cfg);
    for (const auto& est : report.estimates) {
      std::cout << est.name << " = " << est.value;
      if (est.standard_error > 0.0) std::cout << " +/- " << est.standard_error;
      if (est.theory) std::cout << " (theory " << *est.theory << ")";
      std::cout << "  n=" << est.samples << "\n";
    }
    for (const auto& c : report.criteria) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    }
    if (!cfg.out_dir.empty()) std::cout << "report: " << cfg.out_dir << "/report.json\n";
    return report.all_pass() ? kExitPass : kExitFail;
  } catch (const rotodrum::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == rotodrum::ErrorCode::ParseError ||
        e.code() == rotodrum::ErrorCode::ValidationError) {
      return kExitConfig;
    }
    return kExitNumeric;
  }
}

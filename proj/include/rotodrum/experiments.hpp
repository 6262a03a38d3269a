#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rotodrum/config.hpp"
#include "rotodrum/stats.hpp"

namespace rotodrum {

std::string_view version_string();

struct Estimate {
  std::string name;
  double value{0.0};
  double standard_error{0.0};
  std::size_t samples{0};
  std::optional<double> theory;
  std::optional<double> z_score;
};

struct CriterionResult {
  std::string name;
  bool pass{false};
  std::string detail;
};

struct RunReport {
  std::string experiment;
  std::map<std::string, std::string> config;
  std::string version;
  std::vector<Estimate> estimates;
  std::map<std::string, double> theory;
  std::vector<CriterionResult> criteria;
  std::vector<std::string> artifacts;
  double wall_seconds{0.0};

  bool all_pass() const;
  const Estimate* find(std::string_view name) const;
  /// Report as JSON text (two-space indent).
  std::string to_json() const;
};

/// Runs the configured experiment. When cfg.out_dir is set, CSV artifacts and
/// report.json are written there. Deterministic for fixed (config, seed).
RunReport run_experiment(const ExperimentConfig& cfg);

/// Estimate with theory and z-score filled in.
Estimate make_estimate(std::string name, const RunningStats& stats, std::optional<double> theory);

}  // namespace rotodrum

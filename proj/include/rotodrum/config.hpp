#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rotodrum/domain.hpp"
#include "rotodrum/errors.hpp"
#include "rotodrum/gravity.hpp"

namespace rotodrum {

/// Names accepted by the `experiment` key.
const std::vector<std::string>& experiment_names();

struct DomainSpec {
  std::string kind{"disc"};  // disc | cylinder | torus | star
  double rho{1.0};
  double ell{1.0};
  int dim{2};
  std::vector<double> star_cos{1.0};
  std::vector<double> star_sin;

  Domain build() const;
};

struct RunSpec {
  std::size_t events{10'000};
  std::size_t flights{100'000};
  double time{0.0};  // 0 = derived from the experiment
  std::size_t samples{1'000};
  double sample_interval{0.0};  // 0 = one theoretical mean flight
  std::size_t replicas{4};
  bool lambertian_caps{false};
  bool perturb_on_tie{false};
};

struct GravitySpec {
  Vec2 p1{0.0, 1.0};
  Vec2 p2{1.0, 0.0};
  double g{1.0};
  double initial_speed{100.0};
  std::size_t bounces{10'000};
  std::size_t seeds{100};
  std::size_t events{10'000};
  Vec2 start{0.0, -1.0};
  Vec2 v_init{0.0, 3.0};
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed{0};
  int threads{1};
  DomainSpec domain;
  double omega{1.0};
  double ef{1.0};
  std::vector<double> masses{1.0};
  std::vector<double> radii{0.0};
  RunSpec run;
  GravitySpec gravity;
  std::string out_dir;
  bool write_flights{true};
  /// Every key as given (after defaults were applied), sorted.
  std::map<std::string, std::string> echo;
};

struct ConfigIssue {
  std::string key;
  std::string message;
};

/// Validation failure listing every offending key.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }
  bool mentions(std::string_view key) const;

 private:
  std::vector<ConfigIssue> issues_;
};

/// Flat `section.key -> value` pairs from the INI-like grammar or from JSON
/// (detected by a leading '{'). Throws ParseError with the line number.
std::map<std::string, std::string> parse_key_values(std::string_view text);

ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Applies a map of already-flattened keys; throws ConfigError.
ExperimentConfig config_from_keys(const std::map<std::string, std::string>& keys);

}  // namespace rotodrum

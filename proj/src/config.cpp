#include "rotodrum/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace rotodrum {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

void flatten(const nlohmann::json& j, const std::string& prefix,
             std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    return;
  }
  if (j.is_array()) {
    std::string joined;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) joined += ",";
      joined += j[i].is_string() ? j[i].get<std::string>() : j[i].dump();
    }
    out[prefix] = joined;
    return;
  }
  out[prefix] = j.is_string() ? j.get<std::string>() : j.dump();
}

// Collects issues while converting values; each failure names its key.
class Reader {
 public:
  explicit Reader(const std::map<std::string, std::string>& keys) : keys_(keys) {}

  bool has(const std::string& key) const { return keys_.count(key) != 0; }

  void number(const std::string& key, double& target) {
    if (!has(key)) return;
    used_.insert(key);
    if (!parse_double(keys_.at(key), target)) fail(key, "not a number");
  }

  template <class Int>
  void integer(const std::string& key, Int& target) {
    if (!has(key)) return;
    used_.insert(key);
    const std::string& s = keys_.at(key);
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    double as_double = 0.0;
    if (errno == 0 && end && *end == '\0' && !s.empty() && s[0] != '-') {
      target = static_cast<Int>(v);
    } else if (parse_double(s, as_double) && as_double >= 0 && std::floor(as_double) == as_double &&
               as_double < 1.8e19) {
      target = static_cast<Int>(as_double);  // accepts 1e6
    } else {
      fail(key, "not a non-negative integer");
    }
  }

  void boolean(const std::string& key, bool& target) {
    if (!has(key)) return;
    used_.insert(key);
    const std::string& s = keys_.at(key);
    if (s == "true" || s == "1" || s == "yes") {
      target = true;
    } else if (s == "false" || s == "0" || s == "no") {
      target = false;
    } else {
      fail(key, "not a boolean");
    }
  }

  void text(const std::string& key, std::string& target) {
    if (!has(key)) return;
    used_.insert(key);
    target = keys_.at(key);
  }

  void list(const std::string& key, std::vector<double>& target) {
    if (!has(key)) return;
    used_.insert(key);
    std::vector<double> out;
    for (const std::string& item : split_list(keys_.at(key))) {
      double v = 0.0;
      if (!parse_double(item, v)) {
        fail(key, "list entry '" + item + "' is not a number");
        return;
      }
      out.push_back(v);
    }
    target = std::move(out);
  }

  void point(const std::string& key, Vec2& target) {
    std::vector<double> v;
    if (!has(key)) return;
    list(key, v);
    if (v.size() != 2) {
      fail(key, "expected two comma-separated numbers");
      return;
    }
    target = Vec2(v[0], v[1]);
  }

  void fail(const std::string& key, const std::string& message) {
    issues_.push_back({key, message});
  }

  void check_unused() {
    for (const auto& [k, v] : keys_) {
      if (!used_.count(k)) fail(k, "unknown key");
    }
  }

  std::vector<ConfigIssue>& issues() { return issues_; }

 private:
  static bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || !end || *end != '\0' || !std::isfinite(v)) return false;
    out = v;
    return true;
  }

  const std::map<std::string, std::string>& keys_;
  std::set<std::string> used_;
  std::vector<ConfigIssue> issues_;
};

void apply_experiment_defaults(ExperimentConfig& c) {
  const std::string& e = c.experiment;
  if (e == "conservation" || e == "no_fermi_bound") {
    c.domain = DomainSpec{};
    c.omega = 1.0;
    c.ef = 1.0;
    c.masses = {1.0, 2.0, 3.0};
    c.radii = {0.1};
  } else if (e == "knudsen_flight") {
    c.domain = DomainSpec{};
    c.omega = 0.5;
    c.ef = 0.375;  // v* = 1 on the unit disc
  } else if (e == "stationary_density" || e == "microcanonical_invariance") {
    c.domain.kind = "torus";
    c.domain.dim = 3;
    c.omega = 1.0;
    c.ef = 0.5;
    if (e == "stationary_density") c.run.samples = 100'000;
  } else if (e == "winding") {
    c.domain = DomainSpec{};
    c.omega = 1.0;
    c.ef = 0.5;
    c.run.flights = 10'000;
  }
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void fill_echo(ExperimentConfig& c) {
  auto& e = c.echo;
  e["experiment"] = c.experiment;
  e["seed"] = std::to_string(c.seed);
  e["threads"] = std::to_string(c.threads);
  e["domain.kind"] = c.domain.kind;
  e["domain.rho"] = num(c.domain.rho);
  e["domain.ell"] = num(c.domain.ell);
  e["domain.dim"] = std::to_string(c.domain.dim);
  if (c.domain.kind == "star") {
    e["domain.star.cos"] = join(c.domain.star_cos);
    e["domain.star.sin"] = join(c.domain.star_sin);
  }
  e["frame.omega"] = num(c.omega);
  e["ensemble.ef"] = num(c.ef);
  e["ensemble.masses"] = join(c.masses);
  e["ensemble.radii"] = join(c.radii);
  e["run.events"] = std::to_string(c.run.events);
  e["run.flights"] = std::to_string(c.run.flights);
  e["run.time"] = num(c.run.time);
  e["run.samples"] = std::to_string(c.run.samples);
  e["run.sample_interval"] = num(c.run.sample_interval);
  e["run.replicas"] = std::to_string(c.run.replicas);
  e["run.lambertian_caps"] = c.run.lambertian_caps ? "true" : "false";
  e["run.perturb_on_tie"] = c.run.perturb_on_tie ? "true" : "false";
  e["gravity.p1"] = join({c.gravity.p1.x(), c.gravity.p1.y()});
  e["gravity.p2"] = join({c.gravity.p2.x(), c.gravity.p2.y()});
  e["gravity.g"] = num(c.gravity.g);
  e["gravity.initial_speed"] = num(c.gravity.initial_speed);
  e["gravity.bounces"] = std::to_string(c.gravity.bounces);
  e["gravity.seeds"] = std::to_string(c.gravity.seeds);
  e["gravity.events"] = std::to_string(c.gravity.events);
  e["gravity.start"] = join({c.gravity.start.x(), c.gravity.start.y()});
  e["gravity.v_init"] = join({c.gravity.v_init.x(), c.gravity.v_init.y()});
  e["output.dir"] = c.out_dir;
  e["output.flights"] = c.write_flights ? "true" : "false";
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "conservation",       "no_fermi_bound", "knudsen_flight",
      "stationary_density", "winding",        "microcanonical_invariance",
      "gravity_bounce",     "gravity_lambertian"};
  return names;
}

Domain DomainSpec::build() const {
  if (kind == "disc") return Domain(Disc2D{rho});
  if (kind == "cylinder") return Domain(CylinderFinite{rho, ell, dim});
  if (kind == "torus") return Domain(CylinderTorus{rho, dim});
  if (kind == "star") {
    StarShaped2D s;
    s.cos_coeffs = star_cos;
    s.sin_coeffs = star_sin;
    return Domain(s);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown domain kind '" + kind + "'");
}

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(ErrorCode::ValidationError,
            [&] {
              std::string msg;
              for (const ConfigIssue& i : issues) {
                if (!msg.empty()) msg += "; ";
                msg += i.key + ": " + i.message;
              }
              return msg;
            }()),
      issues_(std::move(issues)) {}

bool ConfigError::mentions(std::string_view key) const {
  return std::any_of(issues_.begin(), issues_.end(), [&](const ConfigIssue& i) {
    return i.key == key ||
           (i.key.size() > key.size() && i.key.compare(i.key.size() - key.size(), key.size(), key) == 0 &&
            i.key[i.key.size() - key.size() - 1] == '.');
  });
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    try {
      flatten(nlohmann::json::parse(body), "", out);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
    return out;
  }
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": duplicate key " + full);
    }
    out[full] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

ExperimentConfig config_from_keys(const std::map<std::string, std::string>& keys) {
  Reader r(keys);
  ExperimentConfig c;
  if (!r.has("experiment")) {
    r.fail("experiment", "missing");
  } else {
    r.text("experiment", c.experiment);
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
      r.fail("experiment", "unknown experiment '" + c.experiment + "'");
    }
  }
  apply_experiment_defaults(c);
  if (!r.has("seed")) r.fail("seed", "missing");
  r.integer("seed", c.seed);
  r.integer("threads", c.threads);

  r.text("domain.kind", c.domain.kind);
  r.number("domain.rho", c.domain.rho);
  r.number("domain.ell", c.domain.ell);
  r.integer("domain.dim", c.domain.dim);
  r.list("domain.star.cos", c.domain.star_cos);
  r.list("domain.star.sin", c.domain.star_sin);
  r.number("frame.omega", c.omega);
  r.number("ensemble.ef", c.ef);
  r.list("ensemble.masses", c.masses);
  r.list("ensemble.radii", c.radii);

  r.integer("run.events", c.run.events);
  r.integer("run.flights", c.run.flights);
  r.number("run.time", c.run.time);
  r.integer("run.samples", c.run.samples);
  r.number("run.sample_interval", c.run.sample_interval);
  r.integer("run.replicas", c.run.replicas);
  r.boolean("run.lambertian_caps", c.run.lambertian_caps);
  r.boolean("run.perturb_on_tie", c.run.perturb_on_tie);

  r.point("gravity.p1", c.gravity.p1);
  r.point("gravity.p2", c.gravity.p2);
  r.number("gravity.g", c.gravity.g);
  r.number("gravity.initial_speed", c.gravity.initial_speed);
  r.integer("gravity.bounces", c.gravity.bounces);
  r.integer("gravity.seeds", c.gravity.seeds);
  r.integer("gravity.events", c.gravity.events);
  r.point("gravity.start", c.gravity.start);
  r.point("gravity.v_init", c.gravity.v_init);

  r.text("output.dir", c.out_dir);
  r.boolean("output.flights", c.write_flights);
  r.check_unused();

  // Ranges.
  if (c.threads < 1) r.fail("threads", "must be >= 1");
  const std::set<std::string> kinds = {"disc", "cylinder", "torus", "star"};
  if (!kinds.count(c.domain.kind)) r.fail("domain.kind", "must be disc, cylinder, torus or star");
  if (!(c.domain.rho > 0.0)) r.fail("domain.rho", "must be > 0");
  if (!(c.domain.ell > 0.0)) r.fail("domain.ell", "must be > 0");
  if ((c.domain.kind == "disc" || c.domain.kind == "star") && c.domain.dim != 2) {
    r.fail("domain.dim", "planar domains need dim = 2");
  }
  if (c.domain.dim < 2) r.fail("domain.dim", "must be >= 2");
  if (!(c.omega >= 0.0)) r.fail("frame.omega", "must be >= 0");
  if (c.masses.empty()) r.fail("ensemble.masses", "must not be empty");
  for (double m : c.masses) {
    if (!(m > 0.0)) r.fail("ensemble.masses", "masses must be > 0");
  }
  for (double rad : c.radii) {
    if (!(rad >= 0.0)) r.fail("ensemble.radii", "radii must be >= 0");
  }
  if (c.radii.size() == 1 && c.masses.size() > 1) c.radii.assign(c.masses.size(), c.radii[0]);
  if (c.radii.size() != c.masses.size()) {
    r.fail("ensemble.radii", "needs one entry per mass (or a single shared value)");
  }
  if (c.run.replicas < 1) r.fail("run.replicas", "must be >= 1");
  if (c.run.time < 0.0) r.fail("run.time", "must be >= 0");
  if (c.run.sample_interval < 0.0) r.fail("run.sample_interval", "must be >= 0");
  if (c.experiment.rfind("gravity", 0) == 0) {
    if (!(c.gravity.g >= 0.0)) r.fail("gravity.g", "must be >= 0");
    if (c.experiment == "gravity_bounce" && !(c.gravity.g > 0.0)) r.fail("gravity.g", "must be > 0");
    if (c.experiment == "gravity_bounce" && !(c.omega > 0.0)) r.fail("frame.omega", "must be > 0");
    if (!(c.gravity.initial_speed > 0.0)) r.fail("gravity.initial_speed", "must be > 0");
  }
  if (!r.issues().empty()) throw ConfigError(std::move(r.issues()));
  fill_echo(c);
  return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
  return config_from_keys(parse_key_values(text));
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace rotodrum

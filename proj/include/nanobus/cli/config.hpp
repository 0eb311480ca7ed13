#pragma once

// Run configuration: a strict JSON document. Every dimensioned quantity is an
// object {"value": <number>, "unit": <tag>}; unknown keys are errors that name
// the offending key path.

#include "nanobus/bus_network.hpp"
#include "nanobus/pulse_scheduler.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace nanobus::cli {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Dimension { frequency, capacitance, length, mass, field, time, flux };

inline const char* dimension_name(Dimension d) {
  switch (d) {
    case Dimension::frequency: return "frequency (hz | mhz | ghz | rad_per_s)";
    case Dimension::capacitance: return "capacitance (farad)";
    case Dimension::length: return "length (meter)";
    case Dimension::mass: return "mass (kilogram)";
    case Dimension::field: return "magnetic field (tesla)";
    case Dimension::time: return "time (second)";
    case Dimension::flux: return "flux (phi0)";
  }
  return "?";
}

/// Converts a tagged value to internal units. Cyclic frequency tags are
/// multiplied by 2 pi; rad_per_s is taken as is.
inline std::optional<double> to_internal(double value, const std::string& unit, Dimension d) {
  switch (d) {
    case Dimension::frequency:
      if (unit == "hz") return units::from_hz(value);
      if (unit == "mhz") return units::from_mhz(value);
      if (unit == "ghz") return units::from_ghz(value);
      if (unit == "rad_per_s") return value;
      return std::nullopt;
    case Dimension::capacitance: return unit == "farad" ? std::optional(value) : std::nullopt;
    case Dimension::length: return unit == "meter" ? std::optional(value) : std::nullopt;
    case Dimension::mass: return unit == "kilogram" ? std::optional(value) : std::nullopt;
    case Dimension::field: return unit == "tesla" ? std::optional(value) : std::nullopt;
    case Dimension::time: return unit == "second" ? std::optional(value) : std::nullopt;
    case Dimension::flux: return unit == "phi0" ? std::optional(value) : std::nullopt;
  }
  return std::nullopt;
}

/// View of one JSON object that records which keys were read, so that
/// finish() can reject the rest.
class Node {
 public:
  Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string key_path(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(key_path(key), "missing required key");
    seen_.insert(key);
    return j_.at(key);
  }

  Node object(const std::string& key) { return Node(raw(key), key_path(key)); }

  double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  long long integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) { return has(key) ? integer(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(key_path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
    return v.get<std::string>();
  }

  double quantity(const std::string& key, Dimension d) {
    const Json& v = raw(key);
    const std::string p = key_path(key);
    if (!v.is_object()) throw ConfigError(p, "expected {\"value\": ..., \"unit\": ...}");
    for (const auto& [k, _] : v.items()) {
      if (k != "value" && k != "unit") throw ConfigError(p + "." + k, "unknown key");
    }
    if (!v.contains("unit")) throw ConfigError(p + ".unit", "missing unit tag");
    if (!v.contains("value") || !v.at("value").is_number()) throw ConfigError(p + ".value", "expected a number");
    if (!v.at("unit").is_string()) throw ConfigError(p + ".unit", "expected a string");
    const std::string unit = v.at("unit").get<std::string>();
    const auto out = to_internal(v.at("value").get<double>(), unit, d);
    if (!out) throw ConfigError(p + ".unit", "unit '" + unit + "' is not a " + dimension_name(d));
    return *out;
  }
  std::optional<double> optional_quantity(const std::string& key, Dimension d) {
    return has(key) ? std::optional(quantity(key, d)) : std::nullopt;
  }

  std::vector<Node> array_of_objects(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(key_path(key), "expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], key_path(key) + "." + std::to_string(i));
    return out;
  }

  std::vector<double> numbers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(key_path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(key_path(key) + "." + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError(key_path(k), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"four-pulse", "geometric-phase", "dispersive",
                                              "schedule",   "network",         "sweep"};
  return names;
}

struct NumericConfig {
  int n_cut = 20;
  double tolerance = 1e-10;
  double thermal_n_bar = 0.0;  ///< 0 means vacuum
};

struct FourPulseConfig {
  std::optional<double> t1, t2;  ///< explicit windows; otherwise scheduled for theta_target
  double theta_target = std::numbers::pi / 4.0;
  int random_pairs = 0;  ///< extra analytic check on seeded random (alpha1, alpha2)
  double random_alpha_max = 0.8;
};

struct GeometricConfig {
  int n = 1;
  std::optional<double> g1, g2;  ///< override the device couplings
};

struct DispersiveConfig {
  std::vector<double> delta_over_g{5.0};
  std::optional<double> g;
};

struct ScheduleConfig {
  double theta_target = std::numbers::pi / 4.0;
  bool allow_repetitions = true;
  int max_repetitions = 1000;
  std::optional<double> T1, T2;
  double switching_time = 0.0;
  std::optional<double> quoted_product;  ///< single-shot triple-sine value to test for feasibility
};

struct NetworkConfig {
  std::size_t i = 0, j = 1;
  double theta_target = std::numbers::pi / 4.0;
  std::vector<double> signs;
  bool select_pair = true;  ///< park spectators at Phi_x = 1/2 before running
};

struct SweepConfig {
  std::string base;
  std::string parameter;
  std::vector<double> values;
};

struct RunConfig {
  std::string scenario;
  DeviceParams device;
  ControlSettings controls;
  NumericConfig numeric;
  FourPulseConfig four_pulse;
  GeometricConfig geometric_phase;
  DispersiveConfig dispersive;
  ScheduleConfig schedule;
  NetworkConfig network;
  std::optional<SweepConfig> sweep;
  std::optional<std::string> output_dir;
  Json source;  ///< the document as given (after any scenario override)
};

namespace detail {

inline int checked_int(long long v, long long lo, long long hi, const std::string& path) {
  if (v < lo || v > hi) {
    throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

inline DeviceParams parse_device(Node n) {
  DeviceParams p;
  for (auto& q : n.array_of_objects("qubits")) {
    QubitParams qp;
    qp.E_J0 = q.quantity("E_J0", Dimension::frequency);
    qp.C_J = q.quantity("C_J", Dimension::capacitance);
    qp.C_g = q.quantity("C_g", Dimension::capacitance);
    q.finish();
    p.qubits.push_back(qp);
  }
  Node r = n.object("resonator");
  p.resonator.omega = r.quantity("omega", Dimension::frequency);
  p.resonator.length = r.quantity("length", Dimension::length);
  p.resonator.mass = r.optional_quantity("mass", Dimension::mass);
  p.resonator.x_zpf = r.optional_quantity("x_zpf", Dimension::length);
  r.finish();
  p.B = n.quantity("B", Dimension::field);
  n.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(n.path(), e.what());
  }
  return p;
}

inline ControlSettings parse_controls(Node n) {
  ControlSettings c;
  for (auto& q : n.array_of_objects("qubits")) {
    QubitControl qc;
    qc.N_g = q.number("N_g", 0.5);
    if (q.has("Phi_b")) qc.Phi_b = q.quantity("Phi_b", Dimension::flux);
    if (q.has("Phi_x")) qc.Phi_x = q.quantity("Phi_x", Dimension::flux);
    q.finish();
    c.qubits.push_back(qc);
  }
  n.finish();
  return c;
}

}  // namespace detail

/// Builds a RunConfig from a parsed document; `scenario_override` replaces
/// the document's scenario (and is echoed in `source`).
inline RunConfig parse_config(Json doc, const std::optional<std::string>& scenario_override = std::nullopt) {
  if (!doc.is_object()) throw ConfigError("$", "top level must be an object");
  if (scenario_override) doc["scenario"] = *scenario_override;

  RunConfig cfg;
  cfg.source = doc;
  Node root(cfg.source, "$");
  cfg.scenario = root.string("scenario");
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), cfg.scenario) == names.end()) {
    throw ConfigError("$.scenario", "unknown scenario '" + cfg.scenario + "'");
  }
  cfg.device = detail::parse_device(root.object("device"));
  cfg.controls = detail::parse_controls(root.object("controls"));
  if (cfg.controls.qubits.size() != cfg.device.qubits.size()) {
    throw ConfigError("$.controls.qubits", "needs one entry per device qubit");
  }

  if (root.has("numeric")) {
    Node n = root.object("numeric");
    cfg.numeric.n_cut = detail::checked_int(n.integer("n_cut", 20), 2, 400, n.key_path("n_cut"));
    cfg.numeric.tolerance = n.number("tolerance", 1e-10);
    if (!(cfg.numeric.tolerance > 0.0)) throw ConfigError(n.key_path("tolerance"), "must be positive");
    cfg.numeric.thermal_n_bar = n.number("thermal_n_bar", 0.0);
    if (cfg.numeric.thermal_n_bar < 0.0) throw ConfigError(n.key_path("thermal_n_bar"), "must be >= 0");
    n.finish();
  }
  if (root.has("four_pulse")) {
    Node n = root.object("four_pulse");
    cfg.four_pulse.t1 = n.optional_quantity("t1", Dimension::time);
    cfg.four_pulse.t2 = n.optional_quantity("t2", Dimension::time);
    if (cfg.four_pulse.t1.has_value() != cfg.four_pulse.t2.has_value()) {
      throw ConfigError(n.path(), "t1 and t2 must be given together");
    }
    cfg.four_pulse.theta_target = n.number("theta_target", cfg.four_pulse.theta_target);
    cfg.four_pulse.random_pairs = detail::checked_int(n.integer("random_pairs", 0), 0, 100000, n.key_path("random_pairs"));
    cfg.four_pulse.random_alpha_max = n.number("random_alpha_max", 0.8);
    n.finish();
  }
  if (root.has("geometric_phase")) {
    Node n = root.object("geometric_phase");
    cfg.geometric_phase.n = detail::checked_int(n.integer("n", 1), 1, 1000000, n.key_path("n"));
    cfg.geometric_phase.g1 = n.optional_quantity("g1", Dimension::frequency);
    cfg.geometric_phase.g2 = n.optional_quantity("g2", Dimension::frequency);
    n.finish();
  }
  if (root.has("dispersive")) {
    Node n = root.object("dispersive");
    if (n.has("delta_over_g")) cfg.dispersive.delta_over_g = n.numbers("delta_over_g");
    cfg.dispersive.g = n.optional_quantity("g", Dimension::frequency);
    n.finish();
  }
  if (root.has("schedule")) {
    Node n = root.object("schedule");
    auto& s = cfg.schedule;
    s.theta_target = n.number("theta_target", s.theta_target);
    s.allow_repetitions = n.boolean("allow_repetitions", true);
    s.max_repetitions = detail::checked_int(n.integer("max_repetitions", 1000), 1, 1000000, n.key_path("max_repetitions"));
    s.T1 = n.optional_quantity("T1", Dimension::time);
    s.T2 = n.optional_quantity("T2", Dimension::time);
    if (n.has("switching_time")) s.switching_time = n.quantity("switching_time", Dimension::time);
    if (n.has("quoted_product")) s.quoted_product = n.number("quoted_product");
    n.finish();
  }
  if (root.has("network")) {
    Node n = root.object("network");
    if (n.has("pair")) {
      const auto pair = n.numbers("pair");
      if (pair.size() != 2) throw ConfigError(n.key_path("pair"), "expected two qubit indices");
      for (double v : pair) {
        if (v < 0 || v != std::floor(v)) throw ConfigError(n.key_path("pair"), "indices must be non-negative integers");
      }
      cfg.network.i = static_cast<std::size_t>(pair[0]);
      cfg.network.j = static_cast<std::size_t>(pair[1]);
    }
    cfg.network.theta_target = n.number("theta_target", cfg.network.theta_target);
    if (n.has("signs")) cfg.network.signs = n.numbers("signs");
    cfg.network.select_pair = n.boolean("select_pair", true);
    n.finish();
  }
  if (root.has("sweep")) {
    Node n = root.object("sweep");
    SweepConfig s;
    s.base = n.string("scenario");
    if (s.base == "sweep" ||
        std::find(names.begin(), names.end(), s.base) == names.end()) {
      throw ConfigError(n.key_path("scenario"), "must name a non-sweep scenario");
    }
    s.parameter = n.string("parameter");
    if (n.has("values")) {
      if (n.has("start") || n.has("stop") || n.has("steps")) {
        throw ConfigError(n.path(), "give either values or start/stop/steps");
      }
      s.values = n.numbers("values");
    } else {
      const double a = n.number("start"), b = n.number("stop");
      const int steps = detail::checked_int(n.integer("steps"), 0, 100000, n.key_path("steps"));
      for (int k = 0; k < steps; ++k) s.values.push_back(steps == 1 ? a : a + (b - a) * k / (steps - 1));
    }
    n.finish();
    cfg.sweep = std::move(s);
  }
  if (root.has("output")) {
    Node n = root.object("output");
    if (n.has("dir")) cfg.output_dir = n.string("dir");
    n.finish();
  }
  if (cfg.scenario == "sweep" && !cfg.sweep) throw ConfigError("$.sweep", "missing required key");
  root.finish();
  return cfg;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path, std::string("JSON parse error: ") + e.what());
  }
}

/// "controls.qubits.0.Phi_x" -> "/controls/qubits/0/Phi_x".
inline std::string parameter_pointer(const std::string& dotted) {
  if (dotted.empty()) throw ConfigError("$.sweep.parameter", "empty parameter path");
  std::string out;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("$.sweep.parameter", "malformed path '" + dotted + "'");
    out += "/" + part;
  }
  return out;
}

/// Copy of `doc` with the swept parameter set to `value`. A tagged quantity
/// keeps its unit; a plain number is replaced.
inline Json with_parameter(const Json& doc, const std::string& dotted, double value) {
  const Json::json_pointer ptr(parameter_pointer(dotted));
  if (dotted.rfind("sweep", 0) == 0 || dotted == "scenario") {
    throw ConfigError("$.sweep.parameter", "cannot sweep '" + dotted + "'");
  }
  if (!doc.contains(ptr)) throw ConfigError("$.sweep.parameter", "unknown parameter path '" + dotted + "'");
  Json out = doc;
  Json& target = out.at(ptr);
  if (target.is_object() && target.contains("value")) {
    target["value"] = value;
  } else if (target.is_number_integer() && value == std::floor(value)) {
    target = static_cast<long long>(value);
  } else if (target.is_number()) {
    target = value;
  } else {
    throw ConfigError("$.sweep.parameter", "'" + dotted + "' is not a numeric parameter");
  }
  return out;
}

}  // namespace nanobus::cli

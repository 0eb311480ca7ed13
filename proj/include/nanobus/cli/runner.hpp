#pragma once

// Scenario execution and report assembly for the command-line tool.
// Reports carry no wall-clock data, so identical inputs give identical bytes.

#include "nanobus/cli/config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#ifndef NANOBUS_VERSION
#define NANOBUS_VERSION "0.0.0"
#endif

namespace nanobus::cli {

inline constexpr std::uint64_t kDefaultSeed = 20061;

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

/// One sweep-table row worth of numbers; NaN where a scenario has no such quantity.
struct Summary {
  double g1 = std::nan(""), g2 = std::nan("");
  double theta = std::nan("");
  double process_fidelity = std::nan("");
  double resonator_purity = std::nan("");
  double total_time = std::nan("");
};

struct ScenarioOutput {
  Json result;
  Summary summary;
  Diagnostics diagnostics;
};

struct RunOptions {
  std::uint64_t seed = kDefaultSeed;
  bool verbose = false;
};

namespace detail {

inline void require_degeneracy(const LinearModel& m, std::size_t count, const char* scenario) {
  for (std::size_t k = 0; k < count; ++k) {
    if (m.qubit_freqs[k] != 0.0) {
      throw ConfigError("$.controls.qubits." + std::to_string(k) + ".N_g",
                        std::string(scenario) + " needs N_g = 0.5 (zero qubit splitting)");
    }
  }
}

inline void require_pair_device(const RunConfig& cfg) {
  if (cfg.device.qubits.size() != 2) {
    throw ConfigError("$.device.qubits", "scenario '" + cfg.scenario + "' needs exactly two qubits");
  }
}

inline QState resonator_state(const RunConfig& cfg) {
  const int n = cfg.numeric.n_cut;
  return cfg.numeric.thermal_n_bar > 0.0 ? thermal_state(cfg.numeric.thermal_n_bar, n) : fock_vacuum(n);
}

inline Json report_json(const GateReport& r) {
  return Json{{"theta", r.theta},
              {"process_fidelity", r.process_fidelity},
              {"avg_gate_fidelity", r.avg_gate_fidelity},
              {"resonator_purity", r.resonator_purity},
              {"total_time", r.total_time},
              {"truncation_diagnostic", r.truncation_diagnostic},
              {"repetitions", r.repetitions}};
}

inline QOperator with_resonator_identity(const QOperator& gate, int n_cut) {
  const std::size_t nq = static_cast<std::size_t>(nanobus::detail::qubit_count(gate.dim()));
  return QOperator(kron(gate.matrix(), Matrix(Matrix::Identity(n_cut, n_cut))), system_dims(nq, n_cut));
}

inline QOperator power(const QOperator& u, int n) {
  QOperator out = identity(u.dims());
  for (int k = 0; k < n; ++k) out = u * out;
  return out;
}

inline Summary pair_summary(const LinearModel& m) {
  Summary s;
  if (m.couplings.size() >= 2) {
    s.g1 = std::abs(m.couplings[0]);
    s.g2 = std::abs(m.couplings[1]);
  }
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline ScenarioOutput run_four_pulse(const RunConfig& cfg, const RunOptions& opt) {
  detail::require_pair_device(cfg);
  const LinearModel m = linear_model(cfg.device, cfg.controls);
  detail::require_degeneracy(m, 2, "four-pulse");
  const int n_cut = cfg.numeric.n_cut;
  const double l1 = m.couplings[0], l2 = m.couplings[1];
  if (l1 == 0.0 || l2 == 0.0) throw ConfigError("$.controls.qubits", "four-pulse needs both couplings nonzero");

  ScenarioOutput out;
  std::vector<PulseSegment> segs;
  int reps = 1;
  double t1 = 0.0, t2 = 0.0;
  if (cfg.four_pulse.t1) {
    t1 = *cfg.four_pulse.t1;
    t2 = *cfg.four_pulse.t2;
    segs = four_pulse_segments(l1, l2, m.omega, t1, t2);
  } else {
    ScheduleRequest req;
    req.theta_target = cfg.four_pulse.theta_target;
    req.g1_max = std::abs(l1);
    req.g2_max = std::abs(l2);
    req.omega = m.omega;
    const auto sched = solve_schedule(req);
    reps = sched.repetitions;
    t1 = sched.t1;
    t2 = sched.t2;
    segs = four_pulse_segments(l1, l2, m.omega, t1, t2);
  }
  const Complex a1 = segs[0].alpha, a2 = segs[1].alpha;
  const double theta_block = theta_from_alphas(a1, a2);
  const double theta_analytic = reps * theta_block;

  const auto analytic_block = four_pulse_gate(a1, a2, n_cut, &out.diagnostics);
  const auto sim = simulate_segments(segs, m.couplings, m.omega, n_cut, cfg.numeric.tolerance);
  const QOperator u = detail::power(sim.unitary, reps);
  double block_time = 0.0;
  for (const auto& s : segs) block_time += s.duration;

  const GateReport rep = score_gate(u, xx_gate(theta_analytic), detail::resonator_state(cfg), reps * block_time, reps);
  const auto ext = extract_qubit_gate(u, detail::resonator_state(cfg));
  const double dist_analytic = vacuum_block_distance(sim.unitary, analytic_block);
  const double dist_ideal =
      vacuum_block_distance(sim.unitary, detail::with_resonator_identity(xx_gate(theta_block), n_cut));

  Json flux = Json::array();
  for (const auto& s : segs) {
    const double phi = cfg.controls.qubits[s.qubit].Phi_x;
    flux.push_back({{"qubit", s.qubit},
                    {"sign", s.sign},
                    {"Phi_x", s.sign < 0 ? flipped_tuning_flux(phi) : phi},
                    {"duration", s.duration},
                    {"alpha", complex_json(s.alpha)}});
  }

  Json result;
  result["g1"] = std::abs(l1);
  result["g2"] = std::abs(l2);
  result["omega"] = m.omega;
  result["t1"] = t1;
  result["t2"] = t2;
  result["alpha1"] = complex_json(a1);
  result["alpha2"] = complex_json(a2);
  result["theta_per_block"] = theta_block;
  result["theta_analytic"] = theta_analytic;
  result["theta_prefactor_check"] = {
      {"prefactor", kThetaPrefactor},
      {"theta_from_prefactor", reps * block_theta(std::abs(l1), std::abs(l2), m.omega, t1, t2)}};
  result["gate"] = detail::report_json(rep);
  result["residual_entanglement"] = ext.residual_entanglement;
  result["distance_to_analytic_sequence"] = dist_analytic;
  result["distance_to_ideal_gate"] = dist_ideal;
  result["segments"] = flux;

  if (cfg.four_pulse.random_pairs > 0) {
    std::mt19937_64 gen(opt.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double rmax = cfg.four_pulse.random_alpha_max;
    double worst_distance = 0.0, worst_residual = 0.0, worst_theta = 0.0;
    for (int k = 0; k < cfg.four_pulse.random_pairs; ++k) {
      Complex b[2];
      for (auto& z : b) z = std::polar(rmax * std::sqrt(u01(gen)), units::kTwoPi * u01(gen));
      const QOperator g = four_pulse_gate(b[0], b[1], n_cut, &out.diagnostics);
      const double th = theta_from_alphas(b[0], b[1]);
      worst_distance = std::max(worst_distance, vacuum_block_distance(g, detail::with_resonator_identity(xx_gate(th), n_cut)));
      worst_residual = std::max(worst_residual, extract_qubit_gate(g, fock_vacuum(n_cut)).residual_entanglement);
      worst_theta = std::max(worst_theta, std::abs(extract_theta(vacuum_qubit_block(g)) - th));
    }
    result["random_pairs"] = {{"count", cfg.four_pulse.random_pairs},
                              {"alpha_max", rmax},
                              {"max_distance", worst_distance},
                              {"max_residual_entanglement", worst_residual},
                              {"max_theta_error", worst_theta}};
  }

  out.result = std::move(result);
  out.summary = detail::pair_summary(m);
  out.summary.theta = rep.theta;
  out.summary.process_fidelity = rep.process_fidelity;
  out.summary.resonator_purity = rep.resonator_purity;
  out.summary.total_time = rep.total_time;
  out.result["numerics"] = {{"steps", sim.total_steps}, {"max_error_estimate", sim.max_error_estimate}};
  return out;
}

inline ScenarioOutput run_geometric_phase(const RunConfig& cfg, const RunOptions&) {
  detail::require_pair_device(cfg);
  const LinearModel m = linear_model(cfg.device, cfg.controls);
  detail::require_degeneracy(m, 2, "geometric-phase");
  const double g1 = cfg.geometric_phase.g1.value_or(std::abs(m.couplings[0]));
  const double g2 = cfg.geometric_phase.g2.value_or(std::abs(m.couplings[1]));
  const int n = cfg.geometric_phase.n;

  ScenarioOutput out;
  auto r = geometric_phase_gate(g1, g2, m.omega, n, cfg.numeric.n_cut, &out.diagnostics);
  if (cfg.numeric.thermal_n_bar > 0.0) {
    r.report = score_gate(r.unitary, xx_gate(r.theta_analytic), detail::resonator_state(cfg), r.report.total_time, n);
  }
  const double rel = r.theta_analytic != 0.0 ? std::abs(std::abs(r.report.theta) - std::abs(r.theta_analytic)) /
                                                    std::abs(r.theta_analytic)
                                              : std::abs(r.report.theta);
  out.result = {{"g1", g1},
                {"g2", g2},
                {"omega", m.omega},
                {"n", n},
                {"gate_time", r.report.total_time},
                {"theta_analytic", r.theta_analytic},
                {"theta_relative_error", rel},
                {"gate", detail::report_json(r.report)}};
  out.summary.g1 = std::abs(m.couplings[0]);
  out.summary.g2 = std::abs(m.couplings[1]);
  out.summary.theta = r.report.theta;
  out.summary.process_fidelity = r.report.process_fidelity;
  out.summary.resonator_purity = r.report.resonator_purity;
  out.summary.total_time = r.report.total_time;
  return out;
}

inline ScenarioOutput run_dispersive(const RunConfig& cfg, const RunOptions& opt) {
  detail::require_pair_device(cfg);
  const LinearModel m = linear_model(cfg.device, cfg.controls);
  const double g = cfg.dispersive.g.value_or(std::abs(m.couplings[0]));
  if (!(g > 0.0)) throw ConfigError("$.dispersive.g", "coupling must be positive");
  if (cfg.dispersive.delta_over_g.empty()) throw ConfigError("$.dispersive.delta_over_g", "needs at least one value");

  ScenarioOutput out;
  Json points = Json::array();
  bool monotone = true;
  double previous = -1.0;
  for (std::size_t k = 0; k < cfg.dispersive.delta_over_g.size(); ++k) {
    const double r = cfg.dispersive.delta_over_g[k];
    if (!(r > 0.0)) {
      throw ConfigError("$.dispersive.delta_over_g." + std::to_string(k), "must be positive");
    }
    if (opt.verbose) std::cerr << "dispersive: delta/g = " << r << "\n";
    const auto d = dispersive_gate_check(g, r, m.omega, cfg.numeric.n_cut);
    const double t = sqrt_iswap_time(g, d.delta);
    const auto h_eff = dispersive_effective_hamiltonian(coupling_sign(0) * g, coupling_sign(1) * g, d.delta);
    const double eff = phase_minimized_distance(unitary_evolution(h_eff, t).matrix(), sqrt_iswap().matrix());
    points.push_back({{"delta_over_g", r},
                      {"delta", d.delta},
                      {"gate_time", t},
                      {"effective_model_distance", eff},
                      {"raw_fidelity", d.raw_fidelity},
                      {"local_phase1", d.local_phase1},
                      {"local_phase2", d.local_phase2},
                      {"j_model", d.j_model},
                      {"j_fit", d.j_fit},
                      {"gate", detail::report_json(d.report)}});
    if (d.report.process_fidelity <= previous) monotone = false;
    previous = d.report.process_fidelity;
    if (k == 0) {
      out.summary.theta = std::abs(d.j_fit) * t;
      out.summary.process_fidelity = d.report.process_fidelity;
      out.summary.resonator_purity = d.report.resonator_purity;
      out.summary.total_time = t;
    }
  }
  out.result = {{"g", g}, {"omega", m.omega}, {"points", points}, {"fidelity_monotone_increasing", monotone}};
  out.summary.g1 = std::abs(m.couplings[0]);
  out.summary.g2 = std::abs(m.couplings[1]);
  return out;
}

inline Json reading_json(const PrefactorReading& r) {
  return {{"prefactor", r.prefactor},
          {"required_product", r.required_product},
          {"single_shot_feasible", r.single_shot_feasible}};
}

inline ScenarioOutput run_schedule(const RunConfig& cfg, const RunOptions&) {
  detail::require_pair_device(cfg);
  const LinearModel m = linear_model(cfg.device, cfg.controls);
  const auto& sc = cfg.schedule;
  ScheduleRequest req;
  req.theta_target = sc.theta_target;
  req.g1_max = std::abs(m.couplings[0]);
  req.g2_max = std::abs(m.couplings[1]);
  req.omega = m.omega;
  req.allow_repetitions = sc.allow_repetitions;
  req.max_repetitions = sc.max_repetitions;
  req.switching_time = sc.switching_time;
  const auto s = solve_schedule(req);

  // The same numbers read as angular frequencies: every rate shrinks by 2 pi,
  // so all times grow by 2 pi.
  const double angular_time = s.total_time * units::kTwoPi;

  Json result;
  result["g1"] = req.g1_max;
  result["g2"] = req.g2_max;
  result["g1_cyclic_hz"] = units::to_hz(req.g1_max);
  result["g2_cyclic_hz"] = units::to_hz(req.g2_max);
  result["omega"] = m.omega;
  result["theta_target"] = sc.theta_target;
  result["max_single_shot_theta"] = max_single_shot_theta(req.g1_max, req.g2_max, m.omega);
  result["triple_sine_max"] = kTripleSineMax;
  result["schedule"] = {{"repetitions", s.repetitions},
                        {"t1", s.t1},
                        {"t2", s.t2},
                        {"total_time", s.total_time},
                        {"achieved_theta", s.achieved_theta},
                        {"single_shot_feasible", s.single_shot_feasible}};
  result["prefactor_readings"] = Json::array(
      {reading_json(prefactor_reading(sc.theta_target, req.g1_max, req.g2_max, m.omega, kThetaPrefactor)),
       reading_json(prefactor_reading(sc.theta_target, req.g1_max, req.g2_max, m.omega, kQuotedPrefactor))});
  result["unit_readings"] = {{"cyclic", {{"total_time", s.total_time}}},
                             {"angular", {{"total_time", angular_time}}}};
  if (sc.quoted_product) {
    result["quoted_product"] = {{"value", *sc.quoted_product},
                                {"maximum", kTripleSineMax},
                                {"feasible", product_feasible(*sc.quoted_product)}};
  }
  if (sc.T1 || sc.T2) {
    if (!(sc.T1 && sc.T2)) throw ConfigError("$.schedule", "T1 and T2 must be given together");
    const auto b = budget_check(s, *sc.T1, *sc.T2);
    result["budget"] = {{"T1", *sc.T1},
                        {"T2", *sc.T2},
                        {"t1_margin", b.t1_margin},
                        {"t2_margin", b.t2_margin},
                        {"pass", b.pass()}};
  }
  ScenarioOutput out;
  out.result = std::move(result);
  out.summary = detail::pair_summary(m);
  out.summary.theta = s.achieved_theta;
  out.summary.total_time = s.total_time;
  return out;
}

inline ScenarioOutput run_network(const RunConfig& cfg, const RunOptions&) {
  const auto& nc = cfg.network;
  NetworkSpec spec;
  spec.device = cfg.device;
  spec.controls = cfg.controls;
  spec.n_cut = cfg.numeric.n_cut;
  spec.signs = nc.signs;
  const std::size_t nq = spec.n_qubits();
  if (nc.i >= nq || nc.j >= nq || nc.i == nc.j) throw ConfigError("$.network.pair", "needs two distinct qubit indices");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("$.network", e.what());
  }
  if (nc.select_pair) spec.controls = select_pair(spec, nc.i, nc.j);
  const LinearModel m = network_model(spec);
  for (std::size_t k : {nc.i, nc.j}) {
    if (m.qubit_freqs[k] != 0.0) {
      throw ConfigError("$.controls.qubits." + std::to_string(k) + ".N_g", "network pair needs N_g = 0.5");
    }
  }

  ScheduleRequest req;
  req.theta_target = nc.theta_target;
  req.g1_max = std::abs(m.couplings[nc.i]);
  req.g2_max = std::abs(m.couplings[nc.j]);
  req.omega = m.omega;
  const auto sched = solve_schedule(req);
  const auto res = run_pair_gate(spec, nc.i, nc.j, sched, cfg.numeric.tolerance);

  NetworkSpec iso;
  iso.device = spec.device;
  iso.device.qubits = {spec.device.qubits[nc.i], spec.device.qubits[nc.j]};
  iso.controls.qubits = {spec.controls.qubits[nc.i], spec.controls.qubits[nc.j]};
  iso.n_cut = spec.n_cut;
  iso.signs = {spec.sign(nc.i), spec.sign(nc.j)};
  const auto iso_res = run_pair_gate(iso, 0, 1, sched, cfg.numeric.tolerance);
  const double pair_distance = phase_minimized_distance(nanobus::detail::pair_block(res.unitary, nq, nc.i, nc.j),
                                                        vacuum_qubit_block(iso_res.unitary));

  Json couplings = Json::array();
  for (double c : m.couplings) couplings.push_back(c);
  ScenarioOutput out;
  out.result = {{"pair", {nc.i, nc.j}},
                {"n_qubits", nq},
                {"couplings", couplings},
                {"repetitions", sched.repetitions},
                {"block_time", sched.total_time / sched.repetitions},
                {"total_time", sched.total_time},
                {"theta_per_block", res.theta},
                {"theta_total", res.theta * sched.repetitions},
                {"isolated_theta_per_block", iso_res.theta},
                {"pair_block_distance", pair_distance},
                {"crosstalk", res.crosstalk}};
  out.summary.g1 = std::abs(m.couplings[0]);
  out.summary.g2 = std::abs(m.couplings[1]);
  out.summary.theta = res.theta * sched.repetitions;
  out.summary.total_time = sched.total_time;
  return out;
}

inline ScenarioOutput run_scenario(const RunConfig& cfg, const RunOptions& opt) {
  if (cfg.scenario == "four-pulse") return run_four_pulse(cfg, opt);
  if (cfg.scenario == "geometric-phase") return run_geometric_phase(cfg, opt);
  if (cfg.scenario == "dispersive") return run_dispersive(cfg, opt);
  if (cfg.scenario == "schedule") return run_schedule(cfg, opt);
  if (cfg.scenario == "network") return run_network(cfg, opt);
  throw ConfigError("$.scenario", "scenario '" + cfg.scenario + "' cannot run as a single point");
}

// ---------------------------------------------------------------------------
// Sweeps

inline const char* kCsvHeader =
    "index,parameter,value,g1_rad_per_s,g2_rad_per_s,theta,process_fidelity,resonator_purity,total_time_s,status,"
    "config_hash";

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

struct SweepRow {
  std::size_t index = 0;
  double value = 0.0;
  Summary summary;
  std::string status = "ok";
  std::string message;
};

/// Couplings of the first two qubits at a sweep point, for rows whose run failed.
inline Summary point_couplings(const RunConfig& cfg) {
  Summary s;
  if (cfg.device.qubits.size() >= 2) {
    s.g1 = std::abs(tunable_coupling(cfg.device, 0, cfg.controls));
    s.g2 = std::abs(tunable_coupling(cfg.device, 1, cfg.controls));
  }
  return s;
}

inline std::vector<SweepRow> run_sweep_points(const RunConfig& cfg, const RunOptions& opt) {
  const auto& sw = *cfg.sweep;
  // validate the path before running anything, so an empty grid still rejects bad paths
  with_parameter(cfg.source, sw.parameter, 0.0);
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < sw.values.size(); ++k) {
    SweepRow row;
    row.index = k;
    row.value = sw.values[k];
    Json doc = with_parameter(cfg.source, sw.parameter, row.value);
    doc.erase("sweep");
    const RunConfig point = parse_config(doc, sw.base);
    if (opt.verbose) std::cerr << "sweep point " << k << ": " << sw.parameter << " = " << row.value << "\n";
    try {
      row.summary = run_scenario(point, opt).summary;
    } catch (const ConvergenceError& e) {
      row.summary = point_couplings(point);
      row.status = "convergence_error";
      row.message = e.what();
    } catch (const InfeasibleError& e) {
      row.summary = point_couplings(point);
      row.status = "infeasible";
      row.message = e.what();
    } catch (const std::invalid_argument& e) {
      row.summary = point_couplings(point);
      row.status = "invalid_point";
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& parameter,
                             const std::string& config_hash) {
  std::string out = std::string(kCsvHeader) + "\r\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out += std::to_string(r.index) + "," + parameter + "," + csv_number(r.value) + "," + csv_number(s.g1) + "," +
           csv_number(s.g2) + "," + csv_number(s.theta) + "," + csv_number(s.process_fidelity) + "," +
           csv_number(s.resonator_purity) + "," + csv_number(s.total_time) + "," + r.status + "," + config_hash +
           "\r\n";
  }
  return out;
}

inline Json summary_json(const Summary& s) {
  return {{"g1", s.g1},
          {"g2", s.g2},
          {"theta", s.theta},
          {"process_fidelity", s.process_fidelity},
          {"resonator_purity", s.resonator_purity},
          {"total_time", s.total_time}};
}

// ---------------------------------------------------------------------------
// Top level

struct RunArtifacts {
  Json report;
  std::optional<std::string> csv;
};

inline Json diagnostics_json(const Diagnostics& d) {
  Json w = Json::array();
  for (const auto& s : d.warnings) w.push_back(s);
  return {{"warnings", w}};
}

inline RunArtifacts execute(const RunConfig& cfg, const RunOptions& opt) {
  RunArtifacts art;
  const std::string config_hash = fnv1a_hex(cfg.source.dump());
  Json result;
  Diagnostics diag;
  if (cfg.scenario == "sweep") {
    const auto rows = run_sweep_points(cfg, opt);
    Json jr = Json::array();
    for (const auto& r : rows) {
      Json row = {{"index", r.index}, {"value", r.value}, {"status", r.status}};
      row["summary"] = summary_json(r.summary);
      if (!r.message.empty()) row["message"] = r.message;
      jr.push_back(row);
    }
    result = {{"base_scenario", cfg.sweep->base},
              {"parameter", cfg.sweep->parameter},
              {"points", rows.size()},
              {"table", "sweep.csv"},
              {"rows", jr}};
    art.csv = sweep_csv(rows, cfg.sweep->parameter, config_hash);
  } else {
    auto o = run_scenario(cfg, opt);
    result = std::move(o.result);
    result["summary"] = summary_json(o.summary);
    diag = std::move(o.diagnostics);
  }
  const Json diag_json = diagnostics_json(diag);

  Json report;
  report["tool"] = {{"name", "nanobus"}, {"version", NANOBUS_VERSION}};
  report["scenario"] = cfg.scenario;
  report["config"] = cfg.source;
  report["result"] = result;
  report["diagnostics"] = diag_json;
  report["determinism"] = {{"seed", opt.seed},
                           {"config_hash", config_hash},
                           {"result_hash", fnv1a_hex(result.dump() + diag_json.dump())}};
  art.report = std::move(report);
  return art;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

inline void emit_error(const std::string& kind, int code, const std::string& message, const std::string& path = {}) {
  Json e = {{"kind", kind}, {"exit_code", code}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  std::cerr << Json{{"error", e}}.dump() << "\n";
}

/// Exit codes: 0 ok, 2 config or invalid input, 3 non-convergence,
/// 4 infeasible schedule, 1 anything else.
inline int run_main(int argc, char** argv) {
  CLI::App app{"Resonator-bus two-qubit gate simulator"};
  std::string config_path, out_dir, scenario;
  std::uint64_t seed = kDefaultSeed;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--scenario", scenario, "override the configured scenario");
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_flag("--verbose", verbose, "progress on stderr");
  app.set_version_flag("--version", std::string(NANOBUS_VERSION));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", 2, e.what());
    return 2;
  }

  try {
    const RunConfig cfg = parse_config(load_json_file(config_path),
                                       scenario.empty() ? std::nullopt : std::optional<std::string>(scenario));
    const std::filesystem::path dir = !out_dir.empty() ? out_dir : cfg.output_dir.value_or("nanobus_out");
    const auto art = execute(cfg, {seed, verbose});
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", art.report.dump(2) + "\n");
    if (art.csv) write_file(dir / "sweep.csv", *art.csv);
    if (verbose) std::cerr << "wrote " << (dir / "report.json").string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    emit_error("config", 2, e.what(), e.path());
    return 2;
  } catch (const ConvergenceError& e) {
    emit_error("convergence", 3, e.what());
    return 3;
  } catch (const InfeasibleError& e) {
    emit_error("infeasible", 4, e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    emit_error("invalid_input", 2, e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("internal", 1, e.what());
    return 1;
  }
}

}  // namespace nanobus::cli

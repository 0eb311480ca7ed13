// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any criterion fails.

#include "nanobus/bus_network.hpp"
#include "nanobus/cli/runner.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <random>

namespace nb = nanobus;
namespace fs = std::filesystem;
using nb::Complex;
using nb::Matrix;

namespace {

constexpr double kPi = std::numbers::pi;
const double kOmega = nb::units::from_mhz(100.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- shared computations, evaluated at a given truncation ----

// The window Hamiltonian touches one qubit and the resonator, so it is
// propagated on that subsystem; the coupling sign still follows the index.
double window_distance(double ratio, double wt, std::size_t qubit, int n_cut) {
  const double lambda = nb::coupling_sign(qubit) * ratio * kOmega;
  const double t = wt / kOmega;
  nb::PropagationSpec spec;
  spec.t_end = t;
  spec.tolerance = 1e-9;
  spec.hamiltonian = [=](double s) { return nb::interaction_hamiltonian(0, lambda, kOmega, s, 1, n_cut); };
  const auto r = nb::propagate(spec);
  const auto v = nb::controlled_displacement(nb::window_alpha(lambda, kOmega, t), 0, n_cut, 1);
  return nb::vacuum_block_distance(r.unitary, v);
}

std::vector<std::pair<Complex, Complex>> random_pairs(int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<Complex, Complex>> out;
  for (int k = 0; k < count; ++k) {
    const Complex a = std::polar(0.8 * std::sqrt(u(gen)), 2.0 * kPi * u(gen));
    const Complex b = std::polar(0.8 * std::sqrt(u(gen)), 2.0 * kPi * u(gen));
    out.emplace_back(a, b);
  }
  return out;
}

struct FourPulseCheck {
  std::vector<double> distances;
  double max_residual = 0.0;
  double max_eigenphase_error = 0.0;
};

FourPulseCheck four_pulse_check(const std::vector<std::pair<Complex, Complex>>& pairs, int n_cut) {
  FourPulseCheck c;
  const Matrix id = Matrix::Identity(n_cut, n_cut);
  for (const auto& [a1, a2] : pairs) {
    const auto u = nb::four_pulse_gate(a1, a2, n_cut);
    const double theta = 2.0 * std::abs(a1) * std::abs(a2) * std::sin(std::arg(a2) - std::arg(a1));
    const nb::QOperator ideal(nb::kron(nb::xx_gate(theta).matrix(), id), u.dims());
    c.distances.push_back(nb::vacuum_block_distance(u, ideal));
    c.max_residual = std::max(c.max_residual, std::abs(nb::extract_qubit_gate(u, nb::fock_vacuum(n_cut)).residual_entanglement));
    c.max_eigenphase_error = std::max(c.max_eigenphase_error, std::abs(nb::extract_theta(nb::vacuum_qubit_block(u)) - theta));
  }
  return c;
}

struct GeometricCheck {
  double purity = 0.0;
  double rel_error = 0.0;
  double theta = 0.0;
};

GeometricCheck geometric_check(int n_cut) {
  const double g = 0.05 * kOmega;
  const auto r = nb::geometric_phase_gate(g, g, kOmega, 1, n_cut);
  const double expected = 4.0 * kPi * g * g / (kOmega * kOmega);
  return {r.report.resonator_purity, std::abs(std::abs(r.report.theta) - expected) / expected, r.report.theta};
}

std::vector<double> dispersive_fidelities(int n_cut) {
  std::vector<double> f;
  for (double r : {5.0, 10.0, 20.0}) f.push_back(nb::dispersive_gate_check(1e-3 * kOmega, r, kOmega, n_cut).report.process_fidelity);
  return f;
}

// ---- criteria ----

Outcome criterion1() {
  double worst = 0.0;
  int points = 0;
  for (double ratio : {0.05, 0.1, 0.3}) {
    for (double wt : {kPi / 2, kPi, 1.5 * kPi, 2.0 * kPi}) {
      for (std::size_t q : {0u, 1u}) {
        worst = std::max(worst, window_distance(ratio, wt, q, 25));
        ++points;
      }
    }
  }
  return {worst < 1e-6, fmt("max phase-minimized distance %.3e over %d windows (n_cut 25, limit 1e-6)", worst, points)};
}

Outcome criterion2() {
  const auto pairs = random_pairs(50, 12345);
  const auto c = four_pulse_check(pairs, 25);
  const double worst = *std::max_element(c.distances.begin(), c.distances.end());

  // Prefactor adjudication: compose a physical four-window sequence and read
  // off theta; compare with theta = P g1 g2 / omega^2 * sin sin sin for P = 4, 8.
  const double g = 0.1 * kOmega;
  const double t1 = 2.1 / kOmega, t2 = 1.0 / kOmega;
  const auto segs = nb::four_pulse_segments(-g, g, kOmega, t1, t2);
  const auto sim = nb::simulate_segments(segs, {-g, g}, kOmega, 25);
  const double theta_numeric = nb::extract_theta(nb::vacuum_qubit_block(sim.unitary));
  const double sss = nb::triple_sine(kOmega * t1 / 2, kOmega * t2 / 2);
  const double err8 = std::abs(theta_numeric - 8.0 * g * g / (kOmega * kOmega) * sss);
  const double err4 = std::abs(theta_numeric - 4.0 * g * g / (kOmega * kOmega) * sss);
  const bool prefactor_ok = err8 < 1e-8 && err4 > 1e-3;
  std::printf("       prefactor: composed gate theta %.10f; prefactor 8 error %.2e, prefactor 4 error %.2e -> %s\n",
              theta_numeric, err8, err4, prefactor_ok ? "prefactor 8 is correct" : "unresolved");
  return {worst < 1e-7 && c.max_residual < 1e-8 && prefactor_ok,
          fmt("50 random pairs: max distance %.3e (limit 1e-7), max residual entanglement %.3e (limit 1e-8), "
              "max eigenphase error %.2e; timing prefactor is 8",
              worst, c.max_residual, c.max_eigenphase_error)};
}

Outcome criterion3() {
  const auto c = geometric_check(25);
  return {c.purity >= 1.0 - 1e-6 && c.rel_error < 1e-4,
          fmt("g/omega = 0.05, n = 1: purity %.12f, theta %.10f, relative error %.2e", c.purity, c.theta, c.rel_error)};
}

Outcome criterion4(double* fidelity5) {
  const double g = 1e-3 * kOmega;
  double eff = 0.0;
  for (double r : {5.0, 10.0, 20.0}) {
    const double delta = r * g;
    const auto h = nb::dispersive_effective_hamiltonian(nb::coupling_sign(0) * g, nb::coupling_sign(1) * g, delta);
    const auto u = nb::unitary_evolution(h, kPi * delta / (4.0 * g * g));
    eff = std::max(eff, nb::phase_minimized_distance(u.matrix(), nb::sqrt_iswap().matrix()));
  }
  const auto f = dispersive_fidelities(20);
  *fidelity5 = f[0];
  const bool monotone = f[0] < f[1] && f[1] < f[2];
  return {eff < 1e-10 && monotone,
          fmt("effective model distance %.2e; full-model fidelity %.6f, %.6f, %.6f at delta/g = 5, 10, 20 "
              "(recorded delta/g = 5 value: %.6f)",
              eff, f[0], f[1], f[2], f[0])};
}

Outcome criterion5() {
  const double ej0 = nb::units::from_ghz(5.0);
  const double g = nb::tunable_coupling(ej0, 0.0, 0.1, 30e-6, 5e-13);
  const double g_mhz = nb::units::to_hz(g) / 1e6;
  const double ratio = std::max(g_mhz / 30.0, 30.0 / g_mhz);

  nb::ScheduleRequest req;
  req.theta_target = kPi / 4.0;
  req.g1_max = req.g2_max = g;
  req.omega = kOmega;
  const auto s = nb::solve_schedule(req);
  const double cyclic = s.total_time;
  const double angular = cyclic * 2.0 * kPi;  // same numbers read as rad/s
  auto factor = [](double t) { return std::max(t / 1e-7, 1e-7 / t); };
  const bool time_ok = factor(cyclic) < 3.0 || factor(angular) < 3.0;
  const bool quoted_infeasible = !nb::product_feasible(0.69);
  return {ratio < 1.5 && time_ok && quoted_infeasible,
          fmt("g' = %.2f MHz (factor %.2f from 30 MHz); gate time %.3e s cyclic reading (factor %.2f), "
              "%.3e s angular reading (factor %.2f), %d blocks; 0.69 vs max %.4f -> %s",
              g_mhz, ratio, cyclic, factor(cyclic), angular, factor(angular), s.repetitions, nb::kTripleSineMax,
              quoted_infeasible ? "infeasible" : "feasible")};
}

Outcome criterion6() {
  double d1 = 0.0;
  for (double ratio : {0.05, 0.1, 0.3}) {
    for (double wt : {kPi / 2, kPi, 1.5 * kPi, 2.0 * kPi}) {
      d1 = std::max(d1, std::abs(window_distance(ratio, wt, 0, 20) - window_distance(ratio, wt, 0, 25)));
    }
  }
  const auto pairs = random_pairs(50, 12345);
  const auto c20 = four_pulse_check(pairs, 20), c25 = four_pulse_check(pairs, 25);
  double d2 = std::abs(c20.max_residual - c25.max_residual);
  std::size_t worst_pair = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double d = std::abs(c20.distances[k] - c25.distances[k]);
    if (d > d2) {
      d2 = d;
      worst_pair = k;
    }
  }
  std::printf("       four-pulse worst pair |a1| = %.3f, |a2| = %.3f: distance %.2e at n_cut 20, %.2e at n_cut 25\n",
              std::abs(pairs[worst_pair].first), std::abs(pairs[worst_pair].second), c20.distances[worst_pair],
              c25.distances[worst_pair]);
  const auto g20 = geometric_check(20), g25 = geometric_check(25);
  const double d3 = std::max(std::abs(g20.purity - g25.purity), std::abs(g20.theta - g25.theta));
  const auto f20 = dispersive_fidelities(20), f25 = dispersive_fidelities(25);
  double d4 = 0.0;
  for (std::size_t k = 0; k < f20.size(); ++k) d4 = std::max(d4, std::abs(f20[k] - f25[k]));
  const double worst = std::max({d1, d2, d3, d4});
  return {worst < 1e-8, fmt("n_cut 20 -> 25 changes: windows %.2e, four-pulse %.2e, geometric %.2e, dispersive %.2e",
                            d1, d2, d3, d4)};
}

Outcome criterion7() {
  nb::NetworkSpec spec;
  for (int k = 0; k < 3; ++k) {
    spec.device.qubits.push_back({nb::units::from_ghz(5.0), 1e-15, 1e-16});
    spec.controls.qubits.push_back({0.5, 0.5, 0.0});
  }
  spec.device.resonator.omega = kOmega;
  spec.device.resonator.length = 30e-6;
  spec.device.resonator.x_zpf = 5e-13;
  spec.device.B = 0.1;
  spec.n_cut = 20;
  spec.controls = nb::select_pair(spec, 1, 2);

  nb::ScheduleRequest req;
  req.theta_target = kPi / 4.0;
  req.g1_max = nb::tunable_coupling(spec.device, 1, spec.controls);
  req.g2_max = nb::tunable_coupling(spec.device, 2, spec.controls);
  req.omega = kOmega;
  const auto sched = nb::solve_schedule(req);
  const auto res = nb::run_pair_gate(spec, 1, 2, sched);

  nb::NetworkSpec iso = spec;
  iso.device.qubits = {spec.device.qubits[1], spec.device.qubits[2]};
  iso.controls.qubits = {spec.controls.qubits[1], spec.controls.qubits[2]};
  iso.signs = {spec.sign(1), spec.sign(2)};
  const auto iso_res = nb::run_pair_gate(iso, 0, 1, sched);
  const nb::QOperator expected(nb::kron(Matrix(Matrix::Identity(2, 2)), iso_res.unitary.matrix()), res.unitary.dims());
  const double dist = nb::vacuum_block_distance(res.unitary, expected);
  return {dist < 1e-8 && res.crosstalk < 1e-10,
          fmt("spectator parked at Phi_x = 1/2: pair vs isolated distance %.2e (limit 1e-8), crosstalk %.2e (limit 1e-10)",
              dist, res.crosstalk)};
}

Outcome criterion8(const std::string& cli, const fs::path& config_dir, const fs::path& work) {
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(config_dir)) {
    if (e.path().extension() == ".json") configs.push_back(e.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) return {false, "no configs found in " + config_dir.string()};
  int identical = 0;
  std::string first_mismatch;
  for (const auto& cfg : configs) {
    std::string sections[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path out = work / ("run" + std::to_string(run)) / cfg.stem();
      fs::remove_all(out);
      const std::string cmd = "\"" + cli + "\" --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"";
      if (std::system(cmd.c_str()) != 0) return {false, "CLI failed on " + cfg.filename().string()};
      const auto report = nb::cli::load_json_file((out / "report.json").string());
      sections[run] = report.at("determinism").dump();
    }
    if (sections[0] == sections[1]) {
      ++identical;
    } else if (first_mismatch.empty()) {
      first_mismatch = cfg.filename().string();
    }
  }
  const bool ok = identical == static_cast<int>(configs.size());
  return {ok, fmt("%d of %zu configs gave byte-identical determinism sections across two runs%s", identical,
                  configs.size(), ok ? "" : (" (first mismatch: " + first_mismatch + ")").c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli, config_dir, work_dir;
  app.add_option("--cli", cli, "path to the nanobus executable")->required();
  app.add_option("--config-dir", config_dir, "directory of sample configs")->required();
  app.add_option("--work-dir", work_dir, "scratch directory")->required();
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work_dir);

  int failures = 0;
  auto report = [&](int id, const std::function<Outcome()>& f) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  double fidelity5 = 0.0;
  report(1, criterion1);
  report(2, criterion2);
  report(3, criterion3);
  report(4, [&] { return criterion4(&fidelity5); });
  report(5, criterion5);
  report(6, criterion6);
  report(7, criterion7);
  report(8, [&] { return criterion8(cli, config_dir, work_dir); });
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}

#pragma once

// Charge-qubit / nanomechanical-resonator circuit: physical parameters,
// derived frequencies and couplings, and the Hamiltonians built from them.
//
// Qubit k (0-based index) carries the circuit label k+1. The flux shift from
// the resonator displacement enters loop k+1 with sign (-1)^(k+1), so qubit
// index 0 couples with sign -1 and index 1 with sign +1.

#include "nanobus/operator_algebra.hpp"
#include "nanobus/units.hpp"

#include <optional>

namespace nanobus {

struct QubitParams {
  double E_J0 = 0.0;  ///< Josephson energy of each SQUID junction [rad/s]
  double C_J = 0.0;   ///< junction capacitance [F]
  double C_g = 0.0;   ///< gate capacitance [F]
};

struct ResonatorParams {
  double omega = 0.0;  ///< flexural-mode angular frequency [rad/s]
  std::optional<double> mass;   ///< effective mass [kg]
  std::optional<double> x_zpf;  ///< zero-point displacement sqrt(hbar / 2 m omega) [m]
  double length = 0.0;          ///< effective length L [m]
};

struct DeviceParams {
  std::vector<QubitParams> qubits;
  ResonatorParams resonator;
  double B = 0.0;  ///< bias field [T]

  /// Zero-point displacement, derived from the mass when not given directly.
  double x_zpf() const {
    if (resonator.x_zpf) return *resonator.x_zpf;
    if (resonator.mass) return std::sqrt(units::kHbar / (2.0 * *resonator.mass * resonator.omega));
    throw std::invalid_argument("DeviceParams: neither mass nor x_zpf given");
  }

  void validate() const {
    if (qubits.empty()) throw std::invalid_argument("DeviceParams: no qubits");
    for (const auto& q : qubits) {
      if (!(q.E_J0 > 0.0 && q.C_J > 0.0 && q.C_g > 0.0)) {
        throw std::invalid_argument("DeviceParams: qubit quantities must be positive");
      }
    }
    if (!(resonator.omega > 0.0 && resonator.length > 0.0)) {
      throw std::invalid_argument("DeviceParams: omega and L must be positive");
    }
    if (!(B >= 0.0)) throw std::invalid_argument("DeviceParams: B must be non-negative");
    if (!resonator.mass && !resonator.x_zpf) {
      throw std::invalid_argument("DeviceParams: one of mass or x_zpf is required");
    }
    if (resonator.mass && !(*resonator.mass > 0.0)) throw std::invalid_argument("DeviceParams: mass must be positive");
    if (resonator.x_zpf && !(*resonator.x_zpf > 0.0)) throw std::invalid_argument("DeviceParams: x_zpf must be positive");
    if (resonator.mass && resonator.x_zpf) {
      double derived = std::sqrt(units::kHbar / (2.0 * *resonator.mass * resonator.omega));
      if (std::abs(derived - *resonator.x_zpf) > 1e-6 * *resonator.x_zpf) {
        throw std::invalid_argument("DeviceParams: mass and x_zpf are inconsistent");
      }
    }
  }
};

/// Per-qubit knobs. Fluxes are in units of the flux quantum; the SQUID
/// tuning fluxes are Phi_l = -Phi_r = Phi_x.
struct QubitControl {
  double N_g = 0.5;
  double Phi_b = 0.5;
  double Phi_x = 0.0;
};

struct ControlSettings {
  std::vector<QubitControl> qubits;

  void validate() const {
    for (const auto& q : qubits) {
      if (!std::isfinite(q.N_g) || !std::isfinite(q.Phi_b) || !std::isfinite(q.Phi_x)) {
        throw std::invalid_argument("ControlSettings: non-finite control value");
      }
    }
  }
};

/// Sign (-1)^k of the displacement-induced flux for 0-based qubit index.
inline double coupling_sign(std::size_t index) { return index % 2 == 0 ? -1.0 : 1.0; }

/// E_c = e^2 / [2 (2 C_J + C_g)] / hbar.
inline double charging_energy(double C_J, double C_g) {
  if (!(C_J > 0.0 && C_g > 0.0)) throw std::invalid_argument("charging_energy: capacitances must be positive");
  const double e = units::kElementaryCharge;
  return e * e / (2.0 * (2.0 * C_J + C_g)) / units::kHbar;
}

/// omega_k = 4 E_c (2 N_g - 1); negative when |1> is the upper charge state.
inline double qubit_frequency(double E_c, double N_g) { return 4.0 * E_c * (2.0 * N_g - 1.0); }

/// pi B L x_zpf / Phi0: phase excursion per unit (b + b^dagger).
inline double flux_coupling_factor(double B, double L, double x_zpf) {
  return std::numbers::pi * B * L * x_zpf / units::kFluxQuantum;
}

/// Junction energy of a SQUID-replaced junction pair, 2 E_J0 cos(pi Phi_x).
inline double effective_josephson(double E_J0, double Phi_x) { return 2.0 * E_J0 * units::cos_pi(Phi_x); }

/// g = E_J pi B L / (Phi0 sqrt(2 m omega)).
inline double bare_coupling(double E_J, double B, double L, double x_zpf) {
  return E_J * flux_coupling_factor(B, L, x_zpf);
}

/// g' = 2 E_J0 cos(pi Phi_x) pi B L / (Phi0 sqrt(2 m omega)).
inline double tunable_coupling(double E_J0, double Phi_x, double B, double L, double x_zpf) {
  return bare_coupling(effective_josephson(E_J0, Phi_x), B, L, x_zpf);
}

/// Parameters of the linearised model: qubit splittings and signed
/// couplings lambda_k = (-1)^k g'_k (the sign already applied).
struct LinearModel {
  double omega = 0.0;
  std::vector<double> qubit_freqs;
  std::vector<double> couplings;

  std::size_t n_qubits() const { return qubit_freqs.size(); }
};

inline double tunable_coupling(const DeviceParams& p, std::size_t k, const ControlSettings& c) {
  return tunable_coupling(p.qubits.at(k).E_J0, c.qubits.at(k).Phi_x, p.B, p.resonator.length, p.x_zpf());
}

inline LinearModel linear_model(const DeviceParams& p, const ControlSettings& c) {
  p.validate();
  c.validate();
  if (p.qubits.size() != c.qubits.size()) throw std::invalid_argument("device/control qubit count mismatch");
  LinearModel m;
  m.omega = p.resonator.omega;
  for (std::size_t k = 0; k < p.qubits.size(); ++k) {
    const auto& q = p.qubits[k];
    m.qubit_freqs.push_back(qubit_frequency(charging_energy(q.C_J, q.C_g), c.qubits[k].N_g));
    m.couplings.push_back(coupling_sign(k) * tunable_coupling(p, k, c));
  }
  return m;
}

/// Dims {2, ..., 2, n_cut} for `n_qubits` qubits and the resonator.
inline Dims system_dims(std::size_t n_qubits, int n_cut) {
  Dims d(n_qubits, 2);
  d.push_back(n_cut);
  return d;
}

namespace detail {

inline QOperator resonator_op(const QOperator& local, const Dims& dims) {
  return embed(local, dims.size() - 1, dims);
}

inline QOperator qubit_op(Axis axis, std::size_t k, const Dims& dims) { return embed(pauli(axis), k, dims); }

}  // namespace detail

/// H = omega b^dagger b + sum_k [omega_k/2 sigma_zk + lambda_k (b^dagger + b) sigma_xk].
inline QOperator build_linear_hamiltonian(const LinearModel& m, int n_cut) {
  if (n_cut < 2) throw std::invalid_argument("build_linear_hamiltonian: n_cut must be >= 2");
  if (m.couplings.size() != m.qubit_freqs.size()) throw std::invalid_argument("LinearModel: size mismatch");
  const Dims dims = system_dims(m.n_qubits(), n_cut);
  const QOperator b = fock_lowering(n_cut);
  QOperator h = m.omega * detail::resonator_op(number_operator(n_cut), dims);
  const QOperator x = detail::resonator_op(b + b.adjoint(), dims);
  for (std::size_t k = 0; k < m.n_qubits(); ++k) {
    h += 0.5 * m.qubit_freqs[k] * detail::qubit_op(Axis::z, k, dims);
    h += m.couplings[k] * (x * detail::qubit_op(Axis::x, k, dims));
  }
  return h;
}

inline void require_working_point(const ControlSettings& c, const char* where) {
  for (const auto& q : c.qubits) {
    if (std::abs(units::sin_pi(q.Phi_b) - 1.0) > 1e-9) {
      throw std::invalid_argument(std::string(where) + ": bias flux is off the sin(pi Phi_b) = 1 working point");
    }
  }
}

/// Linearised two-qubit Hamiltonian; requires sin(pi Phi_b) = 1 on every qubit.
inline QOperator build_hamiltonian_linear(const DeviceParams& p, const ControlSettings& c, int n_cut) {
  require_working_point(c, "build_hamiltonian_linear");
  return build_linear_hamiltonian(linear_model(p, c), n_cut);
}

/// Full flux-nonlinear Hamiltonian with cos/sin of the operator-valued
/// displacement phase:
///   H = omega b^dagger b + sum_k omega_k/2 sigma_zk
///       - sum_k E_Jk [cos(pi Phi_bk) cos(X) - (-1)^k sin(pi Phi_bk) sin(X)] sigma_xk,
/// with X = pi B L x / Phi0 and E_Jk = 2 E_J0 cos(pi Phi_xk).
inline QOperator build_hamiltonian_full(const DeviceParams& p, const ControlSettings& c, int n_cut) {
  const LinearModel m = linear_model(p, c);
  const Dims dims = system_dims(m.n_qubits(), n_cut);
  const QOperator b = fock_lowering(n_cut);
  const double kappa = flux_coupling_factor(p.B, p.resonator.length, p.x_zpf());
  const QOperator phase = kappa * (b + b.adjoint());
  const QOperator cos_x = detail::resonator_op(function_of_hermitian(phase, [](double v) { return std::cos(v); }), dims);
  const QOperator sin_x = detail::resonator_op(function_of_hermitian(phase, [](double v) { return std::sin(v); }), dims);

  QOperator h = m.omega * detail::resonator_op(number_operator(n_cut), dims);
  for (std::size_t k = 0; k < m.n_qubits(); ++k) {
    const auto& ctl = c.qubits[k];
    const double e_j = effective_josephson(p.qubits[k].E_J0, ctl.Phi_x);
    const QOperator flux_term = units::cos_pi(ctl.Phi_b) * cos_x - coupling_sign(k) * units::sin_pi(ctl.Phi_b) * sin_x;
    h += 0.5 * m.qubit_freqs[k] * detail::qubit_op(Axis::z, k, dims);
    h -= e_j * (flux_term * detail::qubit_op(Axis::x, k, dims));
  }
  return h;
}

/// Single-window lab Hamiltonian omega b^dagger b + lambda (b + b^dagger) sigma_xk.
inline QOperator coupling_window_hamiltonian(std::size_t qubit, double lambda, double omega, std::size_t n_qubits,
                                             int n_cut) {
  if (qubit >= n_qubits) throw std::invalid_argument("coupling_window_hamiltonian: qubit out of range");
  LinearModel m{omega, std::vector<double>(n_qubits, 0.0), std::vector<double>(n_qubits, 0.0)};
  m.couplings[qubit] = lambda;
  return build_linear_hamiltonian(m, n_cut);
}

/// Interaction-picture coupling lambda (b e^{-i omega t} + b^dagger e^{i omega t}) sigma_xk.
inline QOperator interaction_hamiltonian(std::size_t qubit, double lambda, double omega, double t,
                                         std::size_t n_qubits, int n_cut) {
  if (qubit >= n_qubits) throw std::invalid_argument("interaction_hamiltonian: qubit out of range");
  const Dims dims = system_dims(n_qubits, n_cut);
  const Matrix b = fock_lowering(n_cut).matrix();
  const Complex phase = std::exp(Complex(0.0, omega * t));
  QOperator field(Matrix(std::conj(phase) * b + phase * b.adjoint()));
  return lambda * (detail::resonator_op(field, dims) * detail::qubit_op(Axis::x, qubit, dims));
}

/// H'_k(t) for qubit k with the other qubit decoupled and both at charge
/// degeneracy.
inline QOperator build_interaction_hamiltonian(std::size_t k, const DeviceParams& p, const ControlSettings& c,
                                               double t, int n_cut) {
  require_working_point(c, "build_interaction_hamiltonian");
  const LinearModel m = linear_model(p, c);
  if (k >= m.n_qubits()) throw std::invalid_argument("build_interaction_hamiltonian: qubit out of range");
  const double scale = std::abs(m.couplings[k]);
  for (std::size_t j = 0; j < m.n_qubits(); ++j) {
    if (j != k && std::abs(m.couplings[j]) > 1e-12 * scale) {
      throw std::invalid_argument("build_interaction_hamiltonian: another qubit is still coupled");
    }
    if (std::abs(2.0 * c.qubits[j].N_g - 1.0) > 1e-12) {
      throw std::invalid_argument("build_interaction_hamiltonian: qubits must sit at N_g = 1/2");
    }
  }
  return interaction_hamiltonian(k, m.couplings[k], m.omega, t, m.n_qubits(), n_cut);
}

}  // namespace nanobus

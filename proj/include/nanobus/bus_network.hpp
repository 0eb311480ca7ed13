#pragma once

// N charge qubits sharing one resonator bus. A pair (i, j) is selected by
// parking every other qubit at Phi_x = 1/2, where cos(pi Phi_x) = 0 and its
// coupling vanishes exactly.

#include "nanobus/gate_synthesis.hpp"
#include "nanobus/pulse_scheduler.hpp"

#include <cstdint>

namespace nanobus {

struct NetworkSpec {
  DeviceParams device;
  ControlSettings controls;
  int n_cut = 20;
  /// Per-qubit coupling sign; empty means alternating (-1)^k by index.
  std::vector<double> signs;
  std::int64_t max_dim = std::int64_t{1024} * 20;

  std::size_t n_qubits() const { return device.qubits.size(); }

  void validate() const {
    if (n_qubits() < 2) throw std::invalid_argument("NetworkSpec: need at least two qubits");
    if (controls.qubits.size() != n_qubits()) throw std::invalid_argument("NetworkSpec: control count mismatch");
    if (n_cut < 2) throw std::invalid_argument("NetworkSpec: n_cut must be >= 2");
    if (!signs.empty()) {
      if (signs.size() != n_qubits()) throw std::invalid_argument("NetworkSpec: sign override size mismatch");
      for (double s : signs) {
        if (s != 1.0 && s != -1.0) throw std::invalid_argument("NetworkSpec: signs must be +1 or -1");
      }
    }
    if (n_qubits() > 62 || (std::int64_t{1} << n_qubits()) * n_cut > max_dim) {
      throw std::invalid_argument("NetworkSpec: Hilbert dimension exceeds the configured cap");
    }
  }

  double sign(std::size_t k) const { return signs.empty() ? coupling_sign(k) : signs[k]; }
};

inline LinearModel network_model(const NetworkSpec& spec) {
  spec.validate();
  LinearModel m = linear_model(spec.device, spec.controls);
  for (std::size_t k = 0; k < spec.n_qubits(); ++k) {
    m.couplings[k] = spec.sign(k) * tunable_coupling(spec.device, k, spec.controls);
  }
  return m;
}

inline QOperator build_network_hamiltonian(const NetworkSpec& spec) {
  require_working_point(spec.controls, "build_network_hamiltonian");
  return build_linear_hamiltonian(network_model(spec), spec.n_cut);
}

/// Controls that couple only qubits i and j: spectators go to Phi_x = 1/2,
/// the pair to `active_phi_x` (0 gives the largest |g'|).
inline ControlSettings select_pair(const NetworkSpec& spec, std::size_t i, std::size_t j, double active_phi_x = 0.0) {
  spec.validate();
  if (i == j) throw std::invalid_argument("select_pair: i and j must differ");
  if (i >= spec.n_qubits() || j >= spec.n_qubits()) throw std::out_of_range("select_pair: qubit index out of range");
  ControlSettings c = spec.controls;
  for (std::size_t k = 0; k < c.qubits.size(); ++k) c.qubits[k].Phi_x = (k == i || k == j) ? active_phi_x : 0.5;
  return c;
}

/// Permutation operator P with P |q_0 ... q_{N-1}, n> = |q_perm^{-1}...>, i.e.
/// qubit k of the input ends up at position perm[k].
inline QOperator qubit_permutation(const std::vector<std::size_t>& perm, int n_cut) {
  const std::size_t n = perm.size();
  const Dims dims = system_dims(n, n_cut);
  const int d = product(dims);
  Matrix p = Matrix::Zero(d, d);
  for (int idx = 0; idx < d; ++idx) {
    const int fock = idx % n_cut;
    const int bits = idx / n_cut;
    int out_bits = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const int bit = (bits >> (n - 1 - k)) & 1;
      out_bits |= bit << (n - 1 - perm[k]);
    }
    p(out_bits * n_cut + fock, idx) = 1.0;
  }
  return {std::move(p), dims};
}

struct PairGateResult {
  QOperator unitary;      ///< network evolution with the spectators' residual couplings
  QOperator ideal;        ///< same schedule with spectators exactly decoupled
  double theta = 0.0;     ///< pair entangling phase, spectators in |0>, resonator in vacuum
  double crosstalk = 0.0;
};

namespace detail {

// 4x4 block on qubits (i, j) with every other qubit in |0> and the resonator in vacuum.
inline Matrix pair_block(const QOperator& u, std::size_t n_qubits, std::size_t i, std::size_t j) {
  const int n_res = u.dims().back();
  auto index = [&](int bi, int bj) {
    int bits = (bi << (n_qubits - 1 - i)) | (bj << (n_qubits - 1 - j));
    return bits * n_res;
  };
  Matrix out(4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out(r, c) = u(index(r >> 1, r & 1), index(c >> 1, c & 1));
  }
  return out;
}

inline std::vector<PulseSegment> map_roles(const PulseSchedule& schedule, std::size_t i, std::size_t j) {
  std::vector<PulseSegment> segs = schedule.segments;
  for (auto& s : segs) {
    if (s.qubit > 1) throw std::invalid_argument("schedule segments must use roles 0 and 1");
    s.qubit = s.qubit == 0 ? i : j;
  }
  return segs;
}

}  // namespace detail

/// Runs one block of `schedule` on the pair (i, j) of the network (role 0
/// of the schedule drives qubit i, role 1 drives qubit j). Pair couplings
/// come from spec.controls; spectators keep whatever residual coupling those
/// controls give them.
inline PairGateResult run_pair_gate(const NetworkSpec& spec, std::size_t i, std::size_t j,
                                    const PulseSchedule& schedule, double tolerance = 1e-10) {
  if (i == j || i >= spec.n_qubits() || j >= spec.n_qubits()) throw std::out_of_range("run_pair_gate: bad pair");
  const LinearModel m = network_model(spec);
  std::vector<double> spectators(spec.n_qubits(), 0.0);
  for (std::size_t k = 0; k < spec.n_qubits(); ++k) {
    if (k != i && k != j) spectators[k] = m.couplings[k];
  }
  const auto segs = detail::map_roles(schedule, i, j);
  PairGateResult out;
  out.unitary = simulate_segments(segs, m.couplings, m.omega, spec.n_cut, tolerance, spectators).unitary;
  out.ideal = simulate_segments(segs, m.couplings, m.omega, spec.n_cut, tolerance).unitary;
  out.theta = extract_theta(detail::pair_block(out.unitary, spec.n_qubits(), i, j));
  const Matrix w = out.ideal.adjoint().matrix() * out.unitary.matrix();
  const QOperator w_op(w, out.unitary.dims());
  out.crosstalk = phase_minimized_distance(low_fock_columns(w_op), low_fock_columns(identity(w_op.dims())));
  return out;
}

/// Phase-minimised distance from identity of the extra evolution caused by
/// spectator couplings, on resonator-vacuum inputs.
inline double crosstalk_metric(const NetworkSpec& spec, std::size_t i, std::size_t j, const PulseSchedule& schedule,
                               double tolerance = 1e-10) {
  return run_pair_gate(spec, i, j, schedule, tolerance).crosstalk;
}

}  // namespace nanobus

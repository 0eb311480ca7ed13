#pragma once

// Two-qubit gates mediated by the resonator bus:
//  * controlled displacements V(alpha sigma_x) and the four-pulse sequence
//    V(a2 X2) V(a1 X1) V(-a2 X2) V(-a1 X1) = exp(i theta X1 X2) (x) 1,
//  * the simultaneous-coupling geometric-phase gate at t = 2 n pi / omega,
//  * the dispersive XY-exchange (sqrt-iSWAP) gate,
// together with full-numerics counterparts and the qubit-channel extraction
// used to score them.
//
// Couplings passed around here are the signed lambda_k that multiply
// (b + b^dagger) sigma_xk in the Hamiltonian, i.e. (-1)^k g'_k.

#include "nanobus/channel.hpp"
#include "nanobus/device_model.hpp"
#include "nanobus/optimize.hpp"
#include "nanobus/propagator.hpp"

namespace nanobus {

struct PulseSegment {
  std::size_t qubit = 0;
  Complex alpha;       ///< displacement parameter of the unflipped window
  int sign = 1;        ///< +1 -> V(alpha sigma_x), -1 -> V(-alpha sigma_x)
  double duration = 0.0;
};

struct GateReport {
  double theta = 0.0;
  double process_fidelity = 0.0;
  double avg_gate_fidelity = 0.0;
  double resonator_purity = 0.0;
  double total_time = 0.0;
  double truncation_diagnostic = 0.0;
  int repetitions = 1;
};

/// alpha(t) = lambda (1 - e^{i omega t}) / omega for a window of length t.
inline Complex window_alpha(double lambda, double omega, double t) {
  return lambda * (1.0 - std::exp(Complex(0.0, omega * t))) / omega;
}

/// exp[sigma_xk (alpha b^dagger - conj(alpha) b)] on dims {2 x n_qubits, n_cut}.
inline QOperator controlled_displacement(Complex alpha, std::size_t qubit, int n_cut, std::size_t n_qubits = 2,
                                         Diagnostics* diag = nullptr) {
  if (qubit >= n_qubits) throw std::invalid_argument("controlled_displacement: qubit out of range");
  check_truncation(alpha, n_cut, diag, "controlled_displacement");
  const Dims dims = system_dims(n_qubits, n_cut);
  const Matrix b = fock_lowering(n_cut).matrix();
  const QOperator gen = detail::resonator_op(QOperator(Matrix(alpha * b.adjoint() - std::conj(alpha) * b)), dims) *
                        detail::qubit_op(Axis::x, qubit, dims);
  return matrix_exp(gen);
}

/// U = V(a2 X2) V(a1 X1) V(-a2 X2) V(-a1 X1), rightmost applied first.
inline QOperator four_pulse_gate(Complex alpha1, Complex alpha2, int n_cut, Diagnostics* diag = nullptr) {
  check_truncation(std::abs(alpha1) + std::abs(alpha2), n_cut, diag, "four_pulse_gate");
  return controlled_displacement(alpha2, 1, n_cut, 2, diag) * controlled_displacement(alpha1, 0, n_cut, 2, diag) *
         controlled_displacement(-alpha2, 1, n_cut, 2, diag) * controlled_displacement(-alpha1, 0, n_cut, 2, diag);
}

/// theta = 2 |a1| |a2| sin(phi2 - phi1) = 2 Im(conj(a1) a2).
inline double theta_from_alphas(Complex alpha1, Complex alpha2) {
  return 2.0 * (std::conj(alpha1) * alpha2).imag();
}

/// exp(i theta sigma_x1 sigma_x2) on two qubits.
inline QOperator xx_gate(double theta) {
  const Matrix xx = kron(pauli(Axis::x).matrix(), pauli(Axis::x).matrix());
  return {std::cos(theta) * Matrix(Matrix::Identity(4, 4)) + kI * std::sin(theta) * xx, {2, 2}};
}

/// Entangling phase of a two-qubit gate in the sigma_x eigenbasis:
/// theta = [arg(++) - arg(+-)] / 2.
inline double extract_theta(const Matrix& gate) {
  if (gate.rows() != 4 || gate.cols() != 4) throw std::invalid_argument("extract_theta: expected a 4x4 gate");
  Matrix had(2, 2);
  had << 1.0, 1.0, 1.0, -1.0;
  had /= std::sqrt(2.0);
  const Matrix h2 = kron(had, had);
  const Matrix d = h2 * gate * h2;
  return 0.5 * std::arg(d(0, 0) * std::conj(d(1, 1)));
}

/// <0_res| U |0_res>: the qubit block of U between resonator vacua.
inline Matrix vacuum_qubit_block(const QOperator& u) {
  const int n_res = u.dims().back();
  const int n_q = u.dim() / n_res;
  Matrix out(n_q, n_q);
  for (int i = 0; i < n_q; ++i) {
    for (int j = 0; j < n_q; ++j) out(i, j) = u(i * n_res, j * n_res);
  }
  return out;
}

struct QubitGateExtraction {
  Channel channel;
  double residual_entanglement = 0.0;
  double min_resonator_purity = 1.0;
};

namespace detail {

// Product states built from {|0>, |1>, |+>, |+i>} on every qubit.
inline std::vector<Vector> qubit_state_frame(int n_qubits) {
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<Vector> single(4, Vector(2));
  single[0] << 1.0, 0.0;
  single[1] << 0.0, 1.0;
  single[2] << r, r;
  single[3] << r, Complex(0.0, r);
  std::vector<Vector> frame{Vector::Ones(1)};
  for (int q = 0; q < n_qubits; ++q) {
    std::vector<Vector> next;
    for (const auto& f : frame) {
      for (const auto& s : single) {
        Vector v(f.size() * 2);
        for (Eigen::Index i = 0; i < f.size(); ++i) v.segment(2 * i, 2) = f(i) * s;
        next.push_back(std::move(v));
      }
    }
    frame = std::move(next);
  }
  return frame;
}

}  // namespace detail

/// Qubit channel rho -> Tr_res[U (rho (x) sigma_res) U^dagger] plus the
/// resonator purity lost over a fixed frame of qubit inputs.
inline QubitGateExtraction extract_qubit_gate(const QOperator& u_full, const QState& resonator_initial) {
  const int n_res = u_full.dims().back();
  if (resonator_initial.dim() != n_res) throw std::invalid_argument("extract_qubit_gate: resonator dimension mismatch");
  const int dq = u_full.dim() / n_res;
  const std::size_t n_sub = u_full.dims().size();
  std::vector<std::size_t> qubits(n_sub - 1);
  std::iota(qubits.begin(), qubits.end(), std::size_t{0});

  const Matrix sigma = resonator_initial.density();
  const Matrix& u = u_full.matrix();
  Channel channel = channel_from_map(dq, [&](const Matrix& x) -> Matrix {
    return partial_trace(Matrix(u * kron(x, sigma) * u.adjoint()), u_full.dims(), qubits);
  });

  const double initial_purity = resonator_initial.purity();
  const int n_qubits = static_cast<int>(n_sub) - 1;
  double loss = 0.0, min_purity = 1.0;
  const auto frame = detail::qubit_state_frame(n_qubits);
  for (const auto& psi : frame) {
    const Matrix rho_q = psi * psi.adjoint();
    const Matrix out = u * kron(rho_q, sigma) * u.adjoint();
    const double p = purity(partial_trace(out, u_full.dims(), {n_sub - 1}));
    loss += initial_purity - p;
    min_purity = std::min(min_purity, p);
  }
  return {std::move(channel), loss / static_cast<double>(frame.size()), min_purity};
}

/// Scores a full-space unitary against a target qubit gate with the
/// resonator starting in `resonator_initial`.
inline GateReport score_gate(const QOperator& u_full, const QOperator& target, const QState& resonator_initial,
                             double total_time, int repetitions = 1) {
  const auto ext = extract_qubit_gate(u_full, resonator_initial);
  GateReport r;
  if (target.dim() == 4) r.theta = extract_theta(vacuum_qubit_block(u_full));
  r.process_fidelity = process_fidelity(ext.channel, target);
  r.avg_gate_fidelity = average_gate_fidelity(r.process_fidelity, target.dim());
  r.resonator_purity = ext.min_resonator_purity;
  r.total_time = total_time;
  r.truncation_diagnostic = top_fock_population(u_full);
  r.repetitions = repetitions;
  return r;
}

// ---------------------------------------------------------------------------
// Full numerics for coupling windows

/// Interaction-picture propagator of one coupling window of length
/// `duration`, in the window's own frame, with the given signed couplings
/// active on every qubit (zeros for decoupled ones). Propagates the full
/// qubit-resonator space directly.
inline PropagationResult propagate_window_full(const std::vector<double>& couplings, double omega, double duration,
                                               int n_cut, double tolerance = 1e-10) {
  const std::size_t n_qubits = couplings.size();
  const Dims dims = system_dims(n_qubits, n_cut);
  // H(t) = e^{-i omega t} (b S) + e^{i omega t} (b^dagger S), S = sum_k lambda_k sigma_xk
  QOperator s(Matrix::Zero(product(dims), product(dims)), dims);
  for (std::size_t k = 0; k < n_qubits; ++k) {
    if (couplings[k] != 0.0) s += couplings[k] * detail::qubit_op(Axis::x, k, dims);
  }
  const QOperator b = detail::resonator_op(fock_lowering(n_cut), dims);
  const Matrix lower = b.matrix() * s.matrix();
  const Matrix raise = b.matrix().adjoint() * s.matrix();

  PropagationSpec spec;
  spec.t_end = duration;
  spec.tolerance = tolerance;
  spec.hamiltonian = [&](double t) {
    const Complex phase = std::exp(Complex(0.0, omega * t));
    return QOperator(Matrix(std::conj(phase) * lower + phase * raise), dims);
  };
  return propagate(spec);
}

/// Same evolution as propagate_window_full, computed sector by sector: every
/// sigma_xk is conserved, so on the joint sigma_x eigenspace with eigenvalues
/// x_k the resonator sees s (b e^{-i omega t} + h.c.) with s = sum_k lambda_k x_k.
inline PropagationResult propagate_window(const std::vector<double>& couplings, double omega, double duration,
                                          int n_cut, double tolerance = 1e-10) {
  const std::size_t n_qubits = couplings.size();
  const int dq = 1 << n_qubits;
  const Matrix b = fock_lowering(n_cut).matrix();

  Matrix plus(2, 2), minus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  minus << 0.5, -0.5, -0.5, 0.5;

  PropagationResult out;
  Matrix total = Matrix::Zero(static_cast<Eigen::Index>(dq) * n_cut, static_cast<Eigen::Index>(dq) * n_cut);
  std::vector<std::pair<double, PropagationResult>> cache;
  for (int sector = 0; sector < dq; ++sector) {
    double strength = 0.0;
    Matrix projector = Matrix::Identity(1, 1);
    for (std::size_t k = 0; k < n_qubits; ++k) {
      const bool negative = (sector >> (n_qubits - 1 - k)) & 1;
      strength += negative ? -couplings[k] : couplings[k];
      projector = kron(projector, negative ? minus : plus);
    }
    auto hit = std::find_if(cache.begin(), cache.end(), [strength](const auto& e) { return e.first == strength; });
    if (hit == cache.end()) {
      PropagationSpec spec;
      spec.t_end = duration;
      spec.tolerance = tolerance;
      spec.hamiltonian = [&b, strength, omega](double t) {
        const Complex phase = std::exp(Complex(0.0, omega * t));
        return QOperator(Matrix(strength * (std::conj(phase) * b + phase * b.adjoint())));
      };
      cache.emplace_back(strength, propagate(spec));
      hit = std::prev(cache.end());
    }
    total += kron(projector, hit->second.unitary.matrix());
    out.steps = std::max(out.steps, hit->second.steps);
    out.error_estimate = std::max(out.error_estimate, hit->second.error_estimate);
  }
  out.unitary = QOperator(std::move(total), system_dims(n_qubits, n_cut));
  return out;
}

struct SequenceResult {
  QOperator unitary;
  std::vector<QOperator> snapshots;  ///< cumulative unitary after each window
  int total_steps = 0;
  double max_error_estimate = 0.0;
};

/// Time-ordered propagation of a window sequence. Segment j couples its
/// qubit with sign * base_couplings[qubit]; the other scheduled qubits are
/// switched off; any qubit listed in `spectator_couplings` keeps that
/// residual coupling throughout.
inline SequenceResult simulate_segments(const std::vector<PulseSegment>& segments,
                                        const std::vector<double>& base_couplings, double omega, int n_cut,
                                        double tolerance = 1e-10,
                                        const std::vector<double>& spectator_couplings = {}) {
  const std::size_t n_qubits = base_couplings.size();
  SequenceResult out;
  out.unitary = identity(system_dims(n_qubits, n_cut));
  for (const auto& seg : segments) {
    if (seg.qubit >= n_qubits) throw std::invalid_argument("simulate_segments: qubit out of range");
    std::vector<double> c = spectator_couplings.empty() ? std::vector<double>(n_qubits, 0.0) : spectator_couplings;
    if (c.size() != n_qubits) throw std::invalid_argument("simulate_segments: spectator coupling size mismatch");
    c[seg.qubit] = seg.sign * base_couplings[seg.qubit];
    auto res = propagate_window(c, omega, seg.duration, n_cut, tolerance);
    out.unitary = res.unitary * out.unitary;
    out.snapshots.push_back(out.unitary);
    out.total_steps += res.steps;
    out.max_error_estimate = std::max(out.max_error_estimate, res.error_estimate);
  }
  return out;
}

/// The four windows realising V(a2 X2) V(a1 X1) V(-a2 X2) V(-a1 X1) with
/// a_k = alpha(lambda_k, t_k). Sign flips are flux flips (Phi_x -> 1 - Phi_x),
/// so flipped windows have the same duration.
inline std::vector<PulseSegment> four_pulse_segments(double lambda1, double lambda2, double omega, double t1,
                                                     double t2, std::size_t q1 = 0, std::size_t q2 = 1) {
  const Complex a1 = window_alpha(lambda1, omega, t1);
  const Complex a2 = window_alpha(lambda2, omega, t2);
  return {{q1, a1, -1, t1}, {q2, a2, -1, t2}, {q1, a1, +1, t1}, {q2, a2, +1, t2}};
}

/// Flux that flips the sign of cos(pi Phi_x), used for V(-alpha) windows.
inline double flipped_tuning_flux(double phi_x) { return 1.0 - phi_x; }

// ---------------------------------------------------------------------------
// Geometric-phase gate (both qubits coupled at once, omega_k = 0)

/// theta = -4 n pi g1 g2 / omega^2 at t = 2 n pi / omega; the sign follows
/// the (-1)^k coupling convention (lambda1 lambda2 = -g1 g2).
inline double geometric_phase_theta(double g1, double g2, double omega, int n) {
  if (n < 1) throw std::invalid_argument("geometric_phase_theta: n must be >= 1");
  return -4.0 * n * std::numbers::pi * g1 * g2 / (omega * omega);
}

/// Analytic theta at time t; only stroboscopic times t = 2 n pi / omega are accepted.
inline double geometric_phase_theta_at(double g1, double g2, double omega, double t) {
  const double periods = omega * t / units::kTwoPi;
  const double n = std::round(periods);
  if (n < 1.0 || std::abs(periods - n) > 1e-9 * std::max(1.0, n)) {
    throw std::invalid_argument("geometric_phase_theta_at: t is not a stroboscopic time 2 n pi / omega");
  }
  return geometric_phase_theta(g1, g2, omega, static_cast<int>(n));
}

inline QOperator geometric_phase_hamiltonian(double g1, double g2, double omega, int n_cut) {
  return build_linear_hamiltonian({omega, {0.0, 0.0}, {coupling_sign(0) * g1, coupling_sign(1) * g2}}, n_cut);
}

/// Full evolution of the simultaneous-coupling Hamiltonian for time t.
inline QOperator geometric_phase_evolution(double g1, double g2, double omega, double t, int n_cut) {
  PropagationSpec spec;
  const QOperator h = geometric_phase_hamiltonian(g1, g2, omega, n_cut);
  spec.hamiltonian = [&h](double) { return h; };
  spec.t_end = t;
  spec.time_independent = true;
  return propagate(spec).unitary;
}

struct GeometricPhaseResult {
  QOperator unitary;
  GateReport report;
  double theta_analytic = 0.0;
};

inline GeometricPhaseResult geometric_phase_gate(double g1, double g2, double omega, int n, int n_cut,
                                                 Diagnostics* diag = nullptr) {
  const double theta = geometric_phase_theta(g1, g2, omega, n);
  // Largest conditional excursion 2(|g1| + |g2|)/omega.
  check_truncation(2.0 * (std::abs(g1) + std::abs(g2)) / omega, n_cut, diag, "geometric_phase_gate");
  const double t = 2.0 * n * std::numbers::pi / omega;
  QOperator u = geometric_phase_evolution(g1, g2, omega, t, n_cut);
  GateReport rep = score_gate(u, xx_gate(theta), fock_vacuum(n_cut), t, n);
  return {std::move(u), rep, theta};
}

// ---------------------------------------------------------------------------
// Dispersive exchange

/// J (sigma+_1 sigma-_2 + sigma-_1 sigma+_2) with J = lambda1 lambda2 / delta.
inline QOperator dispersive_effective_hamiltonian(double lambda1, double lambda2, double delta) {
  if (delta == 0.0) throw std::invalid_argument("dispersive_effective_hamiltonian: delta must be nonzero");
  const double j = lambda1 * lambda2 / delta;
  Matrix h = Matrix::Zero(4, 4);
  h(1, 2) = j;
  h(2, 1) = j;
  return {std::move(h), {2, 2}};
}

/// sqrt(iSWAP): |01> -> (|01> + i|10>)/sqrt(2), |10> -> (i|01> + |10>)/sqrt(2).
inline QOperator sqrt_iswap() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrix m = Matrix::Identity(4, 4);
  m(1, 1) = r;
  m(2, 2) = r;
  m(1, 2) = Complex(0.0, r);
  m(2, 1) = Complex(0.0, r);
  return {std::move(m), {2, 2}};
}

/// t = pi delta / (4 g^2).
inline double sqrt_iswap_time(double g, double delta) { return std::numbers::pi * delta / (4.0 * g * g); }

/// diag(e^{-i phi/2}, e^{i phi/2}).
inline Matrix rz(double phi) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::exp(Complex(0.0, -0.5 * phi));
  m(1, 1) = std::exp(Complex(0.0, 0.5 * phi));
  return m;
}

struct DispersiveReport {
  GateReport report;          ///< fidelity after the local-phase fit
  double raw_fidelity = 0.0;  ///< process fidelity with no local correction
  double local_phase1 = 0.0;  ///< fitted z-rotation angles (target = Rz1 Rz2 sqrt-iSWAP)
  double local_phase2 = 0.0;
  double j_model = 0.0;
  double j_fit = 0.0;  ///< exchange rate fitted from the |01> <-> |10> transfer
  double delta = 0.0;
};

/// Full linear-model evolution with both qubits at omega + delta, mapped to
/// the frame rotating with the bare qubit and resonator frequencies, scored
/// against sqrt-iSWAP up to fitted local z rotations.
inline DispersiveReport dispersive_gate_check(double g, double delta_over_g, double omega, int n_cut) {
  if (!(g > 0.0 && delta_over_g > 0.0 && omega > 0.0)) {
    throw std::invalid_argument("dispersive_gate_check: inputs must be positive");
  }
  DispersiveReport out;
  out.delta = delta_over_g * g;
  const double wq = omega + out.delta;
  const double lambda1 = coupling_sign(0) * g, lambda2 = coupling_sign(1) * g;
  out.j_model = lambda1 * lambda2 / out.delta;
  const double t = sqrt_iswap_time(g, out.delta);

  const QOperator h = build_linear_hamiltonian({omega, {wq, wq}, {lambda1, lambda2}}, n_cut);
  const QOperator h_free = build_linear_hamiltonian({omega, {wq, wq}, {0.0, 0.0}}, n_cut);
  const QOperator u = interaction_frame(unitary_evolution(h, t), h_free, t);

  const auto ext = extract_qubit_gate(u, fock_vacuum(n_cut));
  const QOperator target = sqrt_iswap();
  out.raw_fidelity = process_fidelity(ext.channel, target);

  auto corrected = [&target](double p1, double p2) {
    return QOperator(Matrix(kron(rz(p1), rz(p2)) * target.matrix()), {2, 2});
  };
  auto infidelity = [&](const std::vector<double>& p) {
    return 1.0 - process_fidelity(ext.channel, corrected(p[0], p[1]));
  };
  // coarse grid, then simplex refinement
  constexpr int grid = 24;
  std::vector<double> best{0.0, 0.0};
  double best_val = infidelity(best);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      std::vector<double> p{units::kTwoPi * (i - grid / 2) / grid, units::kTwoPi * (j - grid / 2) / grid};
      double v = infidelity(p);
      if (v < best_val) {
        best_val = v;
        best = p;
      }
    }
  }
  const auto opt = optimize::nelder_mead(infidelity, best, units::kTwoPi / grid, 1e-15);
  out.local_phase1 = opt.x[0];
  out.local_phase2 = opt.x[1];

  const QOperator fitted = corrected(opt.x[0], opt.x[1]);
  out.report = score_gate(u, fitted, fock_vacuum(n_cut), t);
  out.report.theta = 0.0;

  const Matrix block = vacuum_qubit_block(u);
  out.j_fit = std::atan2(std::abs(block(1, 2)), std::abs(block(1, 1))) / t;
  return out;
}

}  // namespace nanobus

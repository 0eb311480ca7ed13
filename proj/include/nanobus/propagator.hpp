#pragma once

// Time-ordered evolution U = T exp(-i \int H(s) ds) for a sampled Hamiltonian.
//
// Each step is a fourth-order Magnus step on two Gauss-Legendre nodes; the
// step count doubles until two successive results agree to `tolerance` in
// the max-norm. The returned unitary is the finer of the last pair.

#include "nanobus/errors.hpp"
#include "nanobus/operator_algebra.hpp"

namespace nanobus {

using HamiltonianSampler = std::function<QOperator(double)>;

struct PropagationSpec {
  HamiltonianSampler hamiltonian;
  double t_start = 0.0;
  double t_end = 0.0;
  double tolerance = 1e-10;
  int max_steps = 1 << 15;
  int initial_steps = 4;
  /// Skip stepping and exponentiate H(t_start) once.
  bool time_independent = false;
};

struct PropagationResult {
  QOperator unitary;
  int steps = 0;
  double error_estimate = 0.0;
};

namespace detail {

inline QOperator magnus4_march(const HamiltonianSampler& sample, double t0, double t1, int steps) {
  static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  static const double k2 = std::sqrt(3.0) / 12.0;
  const double h = (t1 - t0) / steps;

  QOperator u;
  for (int n = 0; n < steps; ++n) {
    const double t = t0 + n * h;
    const QOperator h1 = sample(t + c1 * h);
    const QOperator h2 = sample(t + c2 * h);
    const Matrix comm = h2.matrix() * h1.matrix() - h1.matrix() * h2.matrix();
    // Omega = -i K with K Hermitian
    const QOperator k(Matrix(0.5 * h * (h1.matrix() + h2.matrix()) - kI * (k2 * h * h) * comm), h1.dims());
    QOperator step = unitary_evolution(k, 1.0);
    u = n == 0 ? std::move(step) : step * u;
  }
  return u;
}

}  // namespace detail

inline PropagationResult propagate(const PropagationSpec& spec) {
  if (!spec.hamiltonian) throw std::invalid_argument("propagate: no Hamiltonian sampler");
  if (!(spec.t_end >= spec.t_start)) throw std::invalid_argument("propagate: t_end < t_start");
  if (!(spec.tolerance > 0.0)) throw std::invalid_argument("propagate: tolerance must be positive");
  if (spec.initial_steps < 1 || spec.max_steps < spec.initial_steps) {
    throw std::invalid_argument("propagate: bad step limits");
  }

  if (spec.time_independent || spec.t_end == spec.t_start) {
    QOperator h = spec.hamiltonian(spec.t_start);
    return {unitary_evolution(h, spec.t_end - spec.t_start), 1, 0.0};
  }

  int steps = spec.initial_steps;
  QOperator coarse = detail::magnus4_march(spec.hamiltonian, spec.t_start, spec.t_end, steps);
  while (2 * steps <= spec.max_steps) {
    QOperator fine = detail::magnus4_march(spec.hamiltonian, spec.t_start, spec.t_end, 2 * steps);
    const double err = max_abs(fine.matrix() - coarse.matrix());
    steps *= 2;
    if (err <= spec.tolerance) return {std::move(fine), steps, err};
    coarse = std::move(fine);
  }
  throw ConvergenceError("propagate: step doubling did not converge within " + std::to_string(spec.max_steps) +
                         " steps");
}

/// e^{i H0 t} U_lab: maps a lab-frame propagator into the frame rotating with H0.
inline QOperator interaction_frame(const QOperator& u_lab, const QOperator& h0, double t) {
  if (u_lab.dims() != h0.dims()) throw std::invalid_argument("interaction_frame: dims mismatch");
  return unitary_evolution(h0, -t) * u_lab;
}

}  // namespace nanobus

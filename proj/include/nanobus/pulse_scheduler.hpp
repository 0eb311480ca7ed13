#pragma once

// Timing solver for the four-pulse sigma_x sigma_x gate.
//
// With a_k = lambda_k (1 - e^{i omega t_k}) / omega and lambda_1 = -g1,
// lambda_2 = +g2, the entangling phase of one four-pulse block is
//
//   theta = P g1 g2 sin(omega t1 / 2) sin(omega t2 / 2) sin(omega (t1 - t2) / 2) / omega^2
//
// with P = 8 (checked against the brute-force composition in the tests).
// The product P = 4 form equals |a1||a2| sin(phi2 - phi1) = theta / 2.

#include "nanobus/errors.hpp"
#include "nanobus/gate_synthesis.hpp"

#include <optional>

namespace nanobus {

inline constexpr double kThetaPrefactor = 8.0;
inline constexpr double kQuotedPrefactor = 4.0;
/// max over real A, B of |sin A sin B sin(A - B)|, attained at A = 2 pi / 3, B = pi / 3.
inline const double kTripleSineMax = 3.0 * std::sqrt(3.0) / 8.0;

inline double triple_sine(double a, double b) { return std::sin(a) * std::sin(b) * std::sin(a - b); }

/// theta of one block for window lengths t1, t2.
inline double block_theta(double g1, double g2, double omega, double t1, double t2,
                          double prefactor = kThetaPrefactor) {
  return prefactor * g1 * g2 * triple_sine(0.5 * omega * t1, 0.5 * omega * t2) / (omega * omega);
}

inline double max_single_shot_theta(double g1, double g2, double omega, double prefactor = kThetaPrefactor) {
  if (!(g1 > 0.0 && g2 > 0.0 && omega > 0.0)) throw std::invalid_argument("max_single_shot_theta: inputs must be positive");
  return prefactor * g1 * g2 / (omega * omega) * kTripleSineMax;
}

struct ScheduleRequest {
  double theta_target = 0.0;
  double g1_max = 0.0;
  double g2_max = 0.0;
  double omega = 0.0;
  bool allow_repetitions = true;
  int max_repetitions = 1000;
  std::optional<double> T1;
  std::optional<double> T2;
  double switching_time = 0.0;  ///< dead time added per segment

  void validate() const {
    if (!(theta_target > 0.0 && theta_target <= std::numbers::pi)) {
      throw std::invalid_argument("ScheduleRequest: theta_target must lie in (0, pi]");
    }
    if (!(g1_max > 0.0 && g2_max > 0.0 && omega > 0.0)) {
      throw std::invalid_argument("ScheduleRequest: couplings and omega must be positive");
    }
    if (max_repetitions < 1) throw std::invalid_argument("ScheduleRequest: max_repetitions must be >= 1");
    if (switching_time < 0.0) throw std::invalid_argument("ScheduleRequest: negative switching time");
    if ((T1 && !(*T1 > 0.0)) || (T2 && !(*T2 > 0.0))) throw std::invalid_argument("ScheduleRequest: lifetimes must be positive");
  }
};

struct PulseSchedule {
  std::vector<PulseSegment> segments;  ///< one four-pulse block
  int repetitions = 1;
  double total_time = 0.0;
  double achieved_theta = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  bool single_shot_feasible = true;
};

namespace detail {

// max over x1 of F(x1, S - x1) with x1 in [S/2, min(S, 2 pi)], x_k = omega t_k.
inline optimize::ScalarOptimum best_split(double s) {
  const double lo = 0.5 * s;
  const double hi = std::min(s, units::kTwoPi);
  if (hi <= lo) return {lo, triple_sine(0.5 * lo, 0.5 * (s - lo))};
  return optimize::golden_maximize([s](double x1) { return triple_sine(0.5 * x1, 0.5 * (s - x1)); }, lo, hi, 1e-15);
}

// Shortest (x1, x2) with F(x1, x2) = r, r in (0, kTripleSineMax]: a 400x400
// grid brackets the smallest feasible sum S, bisection on S then pins the
// point where the best split along x1 + x2 = S just reaches r.
inline std::pair<double, double> solve_block(double r) {
  constexpr int grid = 400;
  const double h = units::kTwoPi / grid;
  double best_s = units::kTwoPi;  // the exact maximum can fall between grid points
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < i; ++j) {
      const double x1 = i * h, x2 = j * h;
      if (x1 + x2 < best_s && triple_sine(0.5 * x1, 0.5 * x2) >= r) best_s = x1 + x2;
    }
  }
  double s_lo = std::max(0.0, best_s - 2.0 * h);
  if (best_split(s_lo).value >= r) s_lo = 0.0;
  double s_hi = best_s;
  if (best_split(s_hi).value < r) s_hi = units::kTwoPi;
  const double s = optimize::bisect([r](double v) { return best_split(v).value - r; }, s_lo, s_hi, 1e-15);
  const auto split = best_split(s);
  return {split.x, s - split.x};
}

}  // namespace detail

/// Shortest schedule of n identical four-pulse blocks reaching theta_target.
/// n is the smallest repetition count for which theta_target / n fits in a
/// single block.
inline PulseSchedule solve_schedule(const ScheduleRequest& req) {
  req.validate();
  const double coef = kThetaPrefactor * req.g1_max * req.g2_max / (req.omega * req.omega);
  const double theta_max = coef * kTripleSineMax;
  const int n_limit = req.allow_repetitions ? req.max_repetitions : 1;

  int n = static_cast<int>(std::ceil(req.theta_target / theta_max - 1e-12));
  n = std::max(n, 1);
  if (n > n_limit) {
    throw InfeasibleError("solve_schedule: theta_target " + std::to_string(req.theta_target) + " needs " +
                          std::to_string(n) + " blocks, limit is " + std::to_string(n_limit));
  }
  const double r = std::min(req.theta_target / n / coef, kTripleSineMax);
  const auto [x1, x2] = detail::solve_block(r);

  PulseSchedule s;
  s.t1 = x1 / req.omega;
  s.t2 = x2 / req.omega;
  s.repetitions = n;
  s.single_shot_feasible = req.theta_target <= theta_max;
  s.segments = four_pulse_segments(coupling_sign(0) * req.g1_max, coupling_sign(1) * req.g2_max, req.omega, s.t1, s.t2);
  double block_time = 0.0;
  for (const auto& seg : s.segments) block_time += seg.duration + req.switching_time;
  s.total_time = n * block_time;
  s.achieved_theta = n * block_theta(req.g1_max, req.g2_max, req.omega, s.t1, s.t2);
  return s;
}

/// Interpretation of the timing equation under one choice of prefactor.
struct PrefactorReading {
  double prefactor = 0.0;
  double required_product = 0.0;  ///< sin sin sin value needed in a single shot
  bool single_shot_feasible = false;
};

inline PrefactorReading prefactor_reading(double theta_target, double g1, double g2, double omega, double prefactor) {
  PrefactorReading r;
  r.prefactor = prefactor;
  r.required_product = theta_target * omega * omega / (prefactor * g1 * g2);
  r.single_shot_feasible = r.required_product <= kTripleSineMax;
  return r;
}

/// A triple-sine product is reachable in one block only up to 3 sqrt(3) / 8.
inline bool product_feasible(double product) { return std::abs(product) <= kTripleSineMax; }

struct BudgetReport {
  bool t1_pass = false;
  bool t2_pass = false;
  double t1_margin = 0.0;  ///< T1 / total_time
  double t2_margin = 0.0;
  bool pass() const { return t1_pass && t2_pass; }
};

/// Gate time must be strictly shorter than each lifetime.
inline BudgetReport budget_check(const PulseSchedule& schedule, double T1, double T2) {
  if (!(T1 > 0.0 && T2 > 0.0)) throw std::invalid_argument("budget_check: lifetimes must be positive");
  BudgetReport b;
  b.t1_margin = T1 / schedule.total_time;
  b.t2_margin = T2 / schedule.total_time;
  b.t1_pass = schedule.total_time < T1;
  b.t2_pass = schedule.total_time < T2;
  return b;
}

}  // namespace nanobus

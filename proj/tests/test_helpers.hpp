#pragma once

#include "nanobus/operator_algebra.hpp"

#include <random>

namespace nanobus::testing {

// Every randomised test draws from an explicitly seeded engine.
inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Matrix random_matrix(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(gen), nd(gen));
  }
  return m;
}

inline Matrix random_hermitian(int n, std::mt19937_64& gen) {
  Matrix a = random_matrix(n, gen);
  return 0.5 * (a + a.adjoint());
}

inline Matrix random_density(int n, std::mt19937_64& gen) {
  Matrix a = random_matrix(n, gen);
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

inline Vector random_pure(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(nd(gen), nd(gen));
  return v / v.norm();
}

// Uniform over the disc |alpha| <= r_max.
inline Complex random_alpha(double r_max, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = r_max * std::sqrt(u(gen));
  const double phi = 2.0 * std::numbers::pi * u(gen);
  return std::polar(r, phi);
}

// Truncated power series, summed to convergence; only for small norms.
inline Matrix series_exp(const Matrix& a, int terms = 60) {
  Matrix out = Matrix::Identity(a.rows(), a.cols());
  Matrix term = out;
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<double>(k);
    out += term;
  }
  return out;
}

}  // namespace nanobus::testing

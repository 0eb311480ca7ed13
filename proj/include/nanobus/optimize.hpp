#pragma once

// Small deterministic optimisers for smooth low-dimensional objectives.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace nanobus::optimize {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for a maximum of a unimodal f on [a, b].
inline ScalarOptimum golden_maximize(const std::function<double(double)>& f, double a, double b,
                                     double x_tol = 1e-13, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  return {x, f(x)};
}

/// Bisection for f(x) = 0 given a sign change on [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b, double x_tol = 1e-15,
                     int max_iter = 200) {
  double fa = f(a);
  for (int it = 0; it < max_iter && std::abs(b - a) > x_tol; ++it) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

struct Optimum {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

/// Nelder-Mead minimisation with standard coefficients.
inline Optimum nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                           double step, double f_tol = 1e-14, int max_iter = 2000) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  std::vector<double> fx(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fx[i] = f(simplex[i]);

  auto combine = [n](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };

  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<std::size_t> order(n + 1);
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&fx](auto a, auto b) { return fx[a] < fx[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      f2.push_back(fx[i]);
    }
    simplex = std::move(s2);
    fx = std::move(f2);
    if (std::abs(fx[n] - fx[0]) <= f_tol * (1.0 + std::abs(fx[0]))) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    }
    auto xr = combine(centroid, simplex[n], -1.0);
    double fr = f(xr);
    if (fr < fx[0]) {
      auto xe = combine(centroid, simplex[n], -2.0);
      double fe = f(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fx[n] = fe;
      } else {
        simplex[n] = xr;
        fx[n] = fr;
      }
    } else if (fr < fx[n - 1]) {
      simplex[n] = xr;
      fx[n] = fr;
    } else {
      auto xc = fr < fx[n] ? combine(centroid, xr, 0.5) : combine(centroid, simplex[n], 0.5);
      double fc = f(xc);
      if (fc < std::min(fr, fx[n])) {
        simplex[n] = xc;
        fx[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          simplex[i] = combine(simplex[0], simplex[i], 0.5);
          fx[i] = f(simplex[i]);
        }
      }
    }
  }
  auto best = std::min_element(fx.begin(), fx.end()) - fx.begin();
  return {simplex[best], fx[best], it};
}

}  // namespace nanobus::optimize

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "benthic/error.hpp"

namespace benthic::numerics {

/// Bernoulli function B(z) = z / (e^z - 1), the exponential-fitting weight.
/// Series branch near zero keeps it accurate where the quotient cancels.
inline double bernoulli(double z) {
  if (std::abs(z) < 1e-4) return 1.0 - z / 2.0 + z * z / 12.0;
  if (z > 700.0) return z * std::exp(-z);
  return z / std::expm1(z);
}

struct Extremum {
  double arg;
  double value;
};

/// Golden-section search for the maximum of a unimodal function on [a, b].
inline Extremum golden_max(const std::function<double(double)>& fn, double a, double b,
                           double tol = 1e-13) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  for (int it = 0; it < 200 && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, fn(x)};
}

/// Uniform scan of [a, b] followed by golden refinement around the best sample.
/// The scan protects against the refinement latching onto a local maximum.
inline Extremum scan_max(const std::function<double(double)>& fn, double a, double b,
                         std::size_t n_scan = 1024) {
  n_scan = std::max<std::size_t>(n_scan, 3);
  const double step = (b - a) / static_cast<double>(n_scan - 1);
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_scan; ++k) {
    const double val = fn(a + step * static_cast<double>(k));
    if (val > best_val) {
      best_val = val;
      best = k;
    }
  }
  const double lo = a + step * static_cast<double>(best == 0 ? 0 : best - 1);
  const double hi = a + step * static_cast<double>(std::min(best + 1, n_scan - 1));
  Extremum refined = golden_max(fn, lo, hi);
  if (refined.value >= best_val) return refined;
  return {a + step * static_cast<double>(best), best_val};
}

inline Extremum scan_min(const std::function<double(double)>& fn, double a, double b,
                         std::size_t n_scan = 1024) {
  Extremum e = scan_max([&](double x) { return -fn(x); }, a, b, n_scan);
  return {e.arg, -e.value};
}

/// Bisection for a sign change of fn on [a, b]; requires fn(a) and fn(b) of opposite sign.
inline double bisect(const std::function<double(double)>& fn, double a, double b,
                     double abs_tol = 1e-12) {
  double fa = fn(a);
  const double fb = fn(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw Error(ErrorCode::BracketFailure, "bisection endpoints do not bracket a root");
  }
  for (int it = 0; it < 200 && (b - a) > abs_tol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = fn(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

namespace detail {
inline double simpson_step(const std::function<double(double)>& fn, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = fn(lm);
  const double frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(fn, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_step(fn, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& fn, double a, double b,
                        double tol = 1e-12) {
  if (a == b) return 0.0;
  const double fa = fn(a);
  const double fb = fn(b);
  const double fm = fn(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(fn, a, b, fa, fm, fb, whole, tol, 48);
}

/// Tridiagonal matrix stored by diagonals; lower[0] and upper[n-1] are unused.
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  Tridiagonal() = default;
  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

  std::size_t size() const { return diag.size(); }

  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = diag[i] * x[i];
      if (i > 0) acc += lower[i] * x[i - 1];
      if (i + 1 < n) acc += upper[i] * x[i + 1];
      y[i] = acc;
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(size());
    apply(x, y);
    return y;
  }
};

/// Thomas elimination without pivoting. Stable for the diagonally dominant
/// (by rows or by columns) systems assembled in this library.
inline std::vector<double> solve_tridiagonal(const Tridiagonal& a, std::span<const double> rhs) {
  const std::size_t n = a.size();
  std::vector<double> c(n, 0.0);
  std::vector<double> x(rhs.begin(), rhs.end());
  double pivot = a.diag[0];
  if (pivot == 0.0 || !std::isfinite(pivot)) {
    throw Error(ErrorCode::LinearSolveFailure, "zero pivot in tridiagonal elimination");
  }
  c[0] = n > 1 ? a.upper[0] / pivot : 0.0;
  x[0] /= pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = a.diag[i] - a.lower[i] * c[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw Error(ErrorCode::LinearSolveFailure, "zero pivot in tridiagonal elimination");
    }
    c[i] = i + 1 < n ? a.upper[i] / pivot : 0.0;
    x[i] = (x[i] - a.lower[i] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

inline double sup_norm(std::span<const double> x) {
  double m = 0.0;
  for (double xi : x) m = std::max(m, std::abs(xi));
  return m;
}

}  // namespace benthic::numerics

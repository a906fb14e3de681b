#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace chlab::quad {

namespace detail {

template <class Fn>
double simpson_step(Fn& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // Below a few ulps of the panel value the difference is pure rounding.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right);
  if (depth <= 0 || std::abs(delta) <= std::max(15.0 * tol, floor) || !std::isfinite(delta)) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson (trapezoid with one Richardson step) on [a, b] to an
/// absolute tolerance, floored at rounding level relative to the value.
template <class Fn>
double adaptive_simpson(Fn&& f, double a, double b, double tol, int max_depth = 40) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Integral over [a, b] split into unit-length panels, each refined adaptively.
template <class Fn>
double panel_integral(Fn&& f, double a, double b, double tol_per_panel) {
  double s = 0.0;
  for (double lo = a; lo < b;) {
    const double hi = std::min(b, lo + 1.0);
    s += adaptive_simpson(f, lo, hi, tol_per_panel);
    lo = hi;
  }
  return s;
}

}  // namespace chlab::quad

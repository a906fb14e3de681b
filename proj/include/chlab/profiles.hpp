#pragma once

// Asymptotic tail profiles. With h(x,t) = (1/t) int_0^t F(u)(x,s) ds,
//   Phi(t) = 1/2 int e^{y} h(y,t) dy,   Psi(t) = 1/2 int e^{-y} h(y,t) dy,
// and u(x,t) = u0(x) + e^{-x} t [Phi(t) + eps(x,t)] with eps -> 0 as x -> +inf
// (mirror statement with Psi as x -> -inf).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "chlab/error.hpp"
#include "chlab/operators.hpp"
#include "chlab/solver.hpp"
#include "chlab/weights.hpp"

namespace chlab {

/// Running trapezoid-in-time integrals H = int_0^t F(u) ds and
/// UUx = int_0^t u u_x ds. Products are taken pointwise without filtering,
/// so H >= 0 holds exactly.
struct ProfileAccumulator {
  Grid grid;
  Field H;
  Field UUx;
  double t_first = 0.0;
  double t_last = 0.0;
  std::size_t n_snapshots = 0;
  Field F_last;
  Field uux_last;

  explicit ProfileAccumulator(const Grid& g) : grid(g), H(g), UUx(g), F_last(g), uux_last(g) {}

  /// Mean nonlinearity h = H / (t_last - t_first).
  Field h() const {
    const double span = t_last - t_first;
    if (!(span > 0.0)) throw InvalidArgument("ProfileAccumulator: need two snapshots with t > 0");
    Field out = H;
    out *= 1.0 / span;
    return out;
  }
};

/// Adds the snapshot (u, u_x) at time t. The first snapshot only fixes the
/// left end of the time integral.
inline void accumulate(ProfileAccumulator& acc, const Field& u, const Field& ux, double t) {
  require_same_grid(u, ux, "accumulate");
  if (!(u.grid == acc.grid)) throw InvalidArgument("accumulate: field is on a different grid");
  if (acc.n_snapshots > 0 && !(t > acc.t_last))
    throw InvalidArgument("accumulate: snapshot times must be strictly increasing");
  const std::size_t n = u.size();
  Field F(acc.grid);
  Field uux(acc.grid);
  for (std::size_t i = 0; i < n; ++i) {
    F[i] = u[i] * u[i] + 0.5 * ux[i] * ux[i];
    uux[i] = u[i] * ux[i];
  }
  if (acc.n_snapshots == 0) {
    acc.t_first = t;
  } else {
    const double w = 0.5 * (t - acc.t_last);
    for (std::size_t i = 0; i < n; ++i) {
      acc.H[i] += w * (acc.F_last[i] + F[i]);
      acc.UUx[i] += w * (acc.uux_last[i] + uux[i]);
    }
  }
  acc.F_last = std::move(F);
  acc.uux_last = std::move(uux);
  acc.t_last = t;
  ++acc.n_snapshots;
}

inline void accumulate(ProfileAccumulator& acc, const Field& u, double t) { accumulate(acc, u, derivative(u), t); }

inline Observer profile_observer(ProfileAccumulator& acc) {
  return [&acc](const Snapshot& s) { accumulate(acc, s.u, s.ux, s.t); };
}

struct ProfileAmplitudes {
  double Phi = 0.0;
  double Psi = 0.0;
  /// The e^{|y|}-weighted integrand is not negligible at the domain edge.
  bool contaminated = false;
};

namespace detail {

/// 1/2 sum e^{+-x} h dx, flagging a non-negligible integrand in the outer 5% of the domain.
inline ProfileAmplitudes weighted_halves(const Field& h, double edge_rel_tol = 1e-8) {
  const Grid& g = h.grid;
  ProfileAmplitudes out;
  double edge_plus = 0.0;
  double edge_minus = 0.0;
  const double edge = 0.95 * g.half_width();
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = g.x(i);
    if (h[i] == 0.0) continue;
    const double ip = std::exp(x + std::log(std::abs(h[i])));
    const double im = std::exp(-x + std::log(std::abs(h[i])));
    out.Phi += ip;
    out.Psi += im;
    if (std::abs(x) >= edge) {
      edge_plus = std::max(edge_plus, ip);
      edge_minus = std::max(edge_minus, im);
    }
  }
  out.Phi *= 0.5 * g.dx();
  out.Psi *= 0.5 * g.dx();
  out.contaminated = !std::isfinite(out.Phi) || !std::isfinite(out.Psi) ||
                     edge_plus * g.dx() > edge_rel_tol * out.Phi || edge_minus * g.dx() > edge_rel_tol * out.Psi;
  return out;
}

}  // namespace detail

/// (Phi(t), Psi(t)) at t = t_last from the accumulated mean nonlinearity.
inline ProfileAmplitudes phi_psi(const ProfileAccumulator& acc) { return detail::weighted_halves(acc.h()); }

/// (Phi(0), Psi(0)) = 1/2 int e^{+-y} F(u0)(y) dy.
inline ProfileAmplitudes phi0_psi0(const Field& u0) {
  if (!all_finite(u0)) throw InvalidArgument("phi0_psi0: u0 is not finite");
  return detail::weighted_halves(nonlinearity_F(u0, false));
}

enum class Side { Plus, Minus };

struct TailResidual {
  std::vector<std::pair<double, double>> values;  // (x, eps)
  std::pair<double, double> window{0.0, 0.0};
  bool empty = true;

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v.second));
    return m;
  }
};

struct WindowConfig {
  /// |u0| must exceed factor * noise_floor * max|u0|.
  double noise_floor = 1e-13;
  double factor = 10.0;
  /// Outer fraction of the admissible region used as the window.
  double outer_fraction = 0.2;
  /// Samples with |x| above this fraction of L are treated as boundary-affected.
  double boundary_fraction = 0.95;
};

/// Automatic window on one side: the contiguous region outward from x = 0 where
/// |u0| is above the noise floor, clipped away from the boundary; the window is
/// its outer `outer_fraction`.
inline std::optional<std::pair<double, double>> tail_window(const Field& u0, Side side, const WindowConfig& cfg = {}) {
  const Grid& g = u0.grid;
  const double peak = chlab::max_abs(u0);
  if (peak == 0.0) return std::nullopt;
  const double floor = cfg.factor * cfg.noise_floor * peak;
  const std::size_t centre = g.size() / 2;
  const double sgn = side == Side::Plus ? 1.0 : -1.0;
  double r_end = 0.0;
  for (std::size_t k = 0; k < g.size() / 2; ++k) {
    const std::size_t i = side == Side::Plus ? centre + k : centre - k;
    const double r = sgn * g.x(i);
    if (r > cfg.boundary_fraction * g.half_width()) break;
    if (!(std::abs(u0[i]) > floor)) break;
    r_end = r;
  }
  if (r_end <= 0.0) return std::nullopt;
  const double r_start = (1.0 - cfg.outer_fraction) * r_end;
  if (side == Side::Plus) return std::make_pair(r_start, r_end);
  return std::make_pair(-r_end, -r_start);
}

/// eps(x,t) over the automatic window:
///   plus:  e^{x}  (u - u0 + UUx) / t - Phi
///   minus: -e^{-x} (u - u0 + UUx) / t - Psi
/// `amplitude` is Phi(t) or Psi(t) accordingly; t is the elapsed time of the accumulator.
inline TailResidual tail_residual(const ProfileAccumulator& acc, const Field& u, const Field& u0, Side side,
                                  double amplitude, const WindowConfig& cfg = {}) {
  require_same_grid(u, u0, "tail_residual");
  const double t = acc.t_last - acc.t_first;
  if (!(t > 0.0)) throw InvalidArgument("tail_residual: need t > 0");
  TailResidual out;
  const auto win = tail_window(u0, side, cfg);
  if (!win) return out;
  out.window = *win;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    if (x < win->first || x > win->second) continue;
    const double incr = u[i] - u0[i] + acc.UUx[i];
    const double eps = side == Side::Plus ? std::exp(x) * incr / t - amplitude : -std::exp(-x) * incr / t - amplitude;
    out.values.emplace_back(x, eps);
  }
  out.empty = out.values.empty();
  return out;
}

/// R(x) = int_x^inf e^{y} h dy (plus) or int_-inf^x e^{-y} h dy (minus) on the grid.
inline Field tail_remainder(const ProfileAccumulator& acc, Side side) {
  const Field h = acc.h();
  const Grid& g = acc.grid;
  Field r(g);
  double s = 0.0;
  if (side == Side::Plus) {
    for (std::size_t i = g.size(); i-- > 0;) {
      s += std::exp(g.x(i)) * h[i] * g.dx();
      r[i] = s;
    }
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) {
      s += std::exp(-g.x(i)) * h[i] * g.dx();
      r[i] = s;
    }
  }
  return r;
}

/// R is non-increasing moving outward through the window.
inline bool tail_remainder_monotone(const Field& remainder, std::pair<double, double> window, Side side) {
  double prev = side == Side::Plus ? kInf : -kInf;
  for (std::size_t i = 0; i < remainder.size(); ++i) {
    const double x = remainder.x(i);
    if (x < window.first || x > window.second) continue;
    if (side == Side::Plus ? remainder[i] > prev : remainder[i] < prev) return false;
    prev = remainder[i];
  }
  return true;
}

/// u(t) - u0 rebuilt from the accumulated integrals: -dx G * H - UUx. With
/// `dealiased` the integrals are filtered the way the solver filters its products.
inline Field reconstruct_increment(const ProfileAccumulator& acc, bool dealiased = true) {
  const Field H = dealiased ? dealias(acc.H) : acc.H;
  const Field U = dealiased ? dealias(acc.UUx) : acc.UUx;
  Field out = convolve_dxG(H);
  out += U;
  out *= -1.0;
  return out;
}

struct ProfileReport {
  double t = 0.0;
  double Phi = 0.0;
  double Psi = 0.0;
  double Phi0 = 0.0;
  double Psi0 = 0.0;
  TailResidual residual_plus;
  TailResidual residual_minus;
  double c1 = 0.0;
  double c2 = 0.0;
  bool contaminated = false;
};

struct ProfileBounds {
  double c1 = 0.0;
  double c2 = 0.0;
  bool pass = false;
};

/// c1 = min over reports of min(Phi, Psi), c2 = max of max(Phi, Psi); pass iff c1 > 0.
inline ProfileBounds profile_bounds_check(const std::vector<ProfileReport>& reports) {
  if (reports.empty()) throw InvalidArgument("profile_bounds_check: no reports");
  ProfileBounds b{kInf, 0.0, false};
  for (const auto& r : reports) {
    b.c1 = std::min({b.c1, r.Phi, r.Psi});
    b.c2 = std::max({b.c2, r.Phi, r.Psi});
  }
  b.pass = b.c1 > 0.0;
  return b;
}

/// Builds a report at the accumulator's current time.
inline ProfileReport make_profile_report(const ProfileAccumulator& acc, const Field& u, const Field& u0,
                                         const ProfileAmplitudes& initial, const WindowConfig& cfg = {}) {
  ProfileReport r;
  r.t = acc.t_last;
  r.Phi0 = initial.Phi;
  r.Psi0 = initial.Psi;
  const auto amp = phi_psi(acc);
  r.Phi = amp.Phi;
  r.Psi = amp.Psi;
  r.contaminated = amp.contaminated;
  r.residual_plus = tail_residual(acc, u, u0, Side::Plus, r.Phi, cfg);
  r.residual_minus = tail_residual(acc, u, u0, Side::Minus, r.Psi, cfg);
  return r;
}

}  // namespace chlab

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chlab/error.hpp"
#include "chlab/operators.hpp"

namespace chlab {

struct SolverConfig {
  double cfl = 0.3;
  double dt_max = 0.01;
  double dt_floor = 1e-9;
  double t_end = 1.0;
  /// Stop (WaveBreaking) once min u_x drops below this value.
  double slope_stop = -100.0;
  int snapshot_stride = 1;
  bool dealias = true;
  /// Largest admissible |u| at the two outermost grid points during the run.
  double boundary_tol = 1e-8;
  /// The same bound applied to the initial data.
  double initial_boundary_tol = 1e-10;

  void validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidArgument("SolverConfig: cfl must lie in (0, 1]");
    if (!(dt_max > 0.0) || !(dt_floor >= 0.0) || !(dt_floor < dt_max))
      throw InvalidArgument("SolverConfig: need 0 <= dt_floor < dt_max");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidArgument("SolverConfig: t_end must be finite and >= 0");
    if (!(slope_stop < 0.0)) throw InvalidArgument("SolverConfig: slope_stop must be negative");
    if (snapshot_stride < 1) throw InvalidArgument("SolverConfig: snapshot_stride must be >= 1");
    if (!(boundary_tol > 0.0) || !(initial_boundary_tol > 0.0))
      throw InvalidArgument("SolverConfig: boundary tolerances must be positive");
  }
};

enum class Status { Running, ReachedTEnd, WaveBreaking, DtCollapse, BoundaryContaminated, NonFinite };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::Running: return "Running";
    case Status::ReachedTEnd: return "ReachedTEnd";
    case Status::WaveBreaking: return "WaveBreaking";
    case Status::DtCollapse: return "DtCollapse";
    case Status::BoundaryContaminated: return "BoundaryContaminated";
    case Status::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

inline bool is_breakdown(Status s) { return s == Status::WaveBreaking || s == Status::DtCollapse; }

struct SolverState {
  double t = 0.0;
  Field u;
  double dt = 0.0;
  long step_count = 0;
  Status status = Status::Running;
  /// Time of the last state that was still Running (left end of the T* bracket).
  double t_last_running = 0.0;
  double min_slope = 0.0;

  explicit SolverState(Field u0) : u(std::move(u0)) {}
};

/// -u u_x - dx G * F(u). With `dealiased`, both products are 2/3-rule
/// filtered. Evaluated with five transforms by fusing the filter and the
/// kernel multiplier into one spectral combination.
inline Field rhs(const Field& u, bool dealiased = true) {
  const Grid& g = u.grid;
  const std::size_t n = g.size();
  const Field ux = derivative(u);
  Field uux(g);
  Field f(g);
  for (std::size_t i = 0; i < n; ++i) {
    uux[i] = u[i] * ux[i];
    f[i] = u[i] * u[i] + 0.5 * ux[i] * ux[i];
  }
  Spectrum a = transform(uux);
  const Spectrum b = transform(f);
  const Complex uux_nyquist = a.coeffs[g.nyquist()];
  for (std::size_t j = 0; j < g.modes(); ++j) {
    const double k = g.wavenumber(j);
    const bool kept = !dealiased || 3 * j < n;
    a.coeffs[j] = kept ? -a.coeffs[j] - Complex(0.0, k / (1.0 + k * k)) * b.coeffs[j] : Complex(0.0, 0.0);
  }
  // Nyquist: the odd kernel multiplier is dropped there, keep the u u_x part.
  if (!dealiased) a.coeffs[g.nyquist()] = -uux_nyquist;
  return inverse(a);
}

inline double boundary_magnitude(const Field& u) { return std::max(std::abs(u[0]), std::abs(u[u.size() - 1])); }

/// Step size rule dt = min(dt_max, cfl dx / max(|u|_inf, eps)).
inline double stable_dt(const Field& u, const SolverConfig& cfg) {
  constexpr double eps = 1e-12;
  return std::min(cfg.dt_max, cfg.cfl * u.grid.dx() / std::max(max_abs(u), eps));
}

/// One classical RK4 step followed by the status checks (finiteness, slope
/// threshold, boundary contamination, t_end). Stepping a state that is no
/// longer Running is a contract violation.
inline void step(SolverState& s, const SolverConfig& cfg) {
  if (s.status != Status::Running) throw InvalidArgument("step: state is not Running (" + std::string(to_string(s.status)) + ")");
  const double remaining = cfg.t_end - s.t;
  if (remaining <= 0.0) {
    s.status = Status::ReachedTEnd;
    return;
  }
  const double dt_cfl = stable_dt(s.u, cfg);
  if (dt_cfl < cfg.dt_floor) {
    s.dt = dt_cfl;
    s.status = Status::DtCollapse;
    return;
  }
  double dt = dt_cfl;
  bool last = false;
  if (dt >= remaining) {
    dt = remaining;
    last = true;
  }

  const Field& u = s.u;
  const Field k1 = rhs(u, cfg.dealias);
  Field tmp = u;
  tmp.axpy(0.5 * dt, k1);
  const Field k2 = rhs(tmp, cfg.dealias);
  tmp = u;
  tmp.axpy(0.5 * dt, k2);
  const Field k3 = rhs(tmp, cfg.dealias);
  tmp = u;
  tmp.axpy(dt, k3);
  const Field k4 = rhs(tmp, cfg.dealias);

  s.t_last_running = s.t;
  for (std::size_t i = 0; i < u.size(); ++i)
    s.u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  s.t = last ? cfg.t_end : s.t + dt;
  s.dt = dt;
  ++s.step_count;

  if (!all_finite(s.u)) {
    s.status = Status::NonFinite;
    return;
  }
  s.min_slope = min_value(derivative(s.u));
  if (s.min_slope < cfg.slope_stop) {
    s.status = Status::WaveBreaking;
  } else if (boundary_magnitude(s.u) > cfg.boundary_tol) {
    s.status = Status::BoundaryContaminated;
  } else if (last) {
    s.status = Status::ReachedTEnd;
  }
}

/// What observers see at each snapshot.
struct Snapshot {
  double t;
  double dt;
  long step;
  Status status;
  const Field& u;
  const Field& ux;
};

using Observer = std::function<void(const Snapshot&)>;

struct LogRecord {
  double t;
  double dt;
  double min_slope;
  double u_inf;
  double ux_inf;
  double energy;
  double mass;
  double tail_ratio;
};

struct RunResult {
  SolverState final_state;
  std::vector<LogRecord> log;
  /// [last Running t, first terminal t] when the run ended in a breakdown status.
  std::optional<std::pair<double, double>> breaking_bracket;
};

/// Integrates from u0 until t_end or a terminal status. Observers (and the
/// built-in log) see t = 0, every `snapshot_stride` steps, and the final state.
inline RunResult run(const Field& u0, const SolverConfig& cfg, std::span<const Observer> observers = {}) {
  cfg.validate();
  if (!all_finite(u0)) throw InvalidArgument("run: initial data is not finite");
  if (boundary_magnitude(u0) > cfg.initial_boundary_tol)
    throw InvalidArgument("run: initial data exceeds boundary_tol at the domain edge; enlarge L");

  RunResult result{SolverState(u0), {}, std::nullopt};
  SolverState& s = result.final_state;
  long last_observed = -1;

  auto observe = [&] {
    const Field ux = derivative(s.u);
    const LogRecord rec{s.t,          s.dt,   min_value(ux), max_abs(s.u), max_abs(ux), energy(s.u, ux), mass(s.u),
                        spectral_tail_ratio(s.u)};
    result.log.push_back(rec);
    const Snapshot snap{s.t, s.dt, s.step_count, s.status, s.u, ux};
    for (const auto& obs : observers) obs(snap);
    last_observed = s.step_count;
  };

  s.min_slope = min_value(derivative(s.u));
  observe();
  if (cfg.t_end <= 0.0) s.status = Status::ReachedTEnd;
  while (s.status == Status::Running) {
    step(s, cfg);
    if (s.status == Status::NonFinite) break;
    if (s.status != Status::Running || s.step_count % cfg.snapshot_stride == 0) {
      if (last_observed != s.step_count) observe();
    }
  }
  if (is_breakdown(s.status))
    result.breaking_bracket = std::make_pair(s.t_last_running, s.t);
  return result;
}

}  // namespace chlab

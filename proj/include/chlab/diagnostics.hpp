#pragma once

// Online monitors and a priori predictors: weighted persistence, wave-breaking
// predictors and the McKean sign classification of m0 = u0 - u0_xx.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chlab/error.hpp"
#include "chlab/operators.hpp"
#include "chlab/solver.hpp"
#include "chlab/weights.hpp"

namespace chlab {

struct SupNorms {
  double u_inf = 0.0;
  double ux_inf = 0.0;
  /// u_inf + ux_inf, the instantaneous contribution to M.
  double m_instant = 0.0;
};

inline SupNorms sup_norms(const Field& u, const Field& ux) {
  const double a = max_abs(u);
  const double b = max_abs(ux);
  return {a, b, a + b};
}

inline SupNorms sup_norms(const Field& u) { return sup_norms(u, derivative(u)); }

inline double min_slope(const Field& u) { return min_value(derivative(u)); }

// ---------------------------------------------------------------------------
// McKean classification

enum class McKeanVerdict { ConstantSignNonneg, ConstantSignNonpos, SimpleChangeNegToPos, Other };

inline std::string_view to_string(McKeanVerdict v) {
  switch (v) {
    case McKeanVerdict::ConstantSignNonneg: return "ConstantSignNonneg";
    case McKeanVerdict::ConstantSignNonpos: return "ConstantSignNonpos";
    case McKeanVerdict::SimpleChangeNegToPos: return "SimpleChangeNegToPos";
    case McKeanVerdict::Other: return "Other";
  }
  return "Unknown";
}

struct McKeanClass {
  McKeanVerdict verdict = McKeanVerdict::Other;
  /// Crossing point, only for SimpleChangeNegToPos.
  std::optional<double> x0;
  double tolerance = 0.0;

  /// Constant sign or a single - to + change: global existence is expected.
  bool predicts_global() const { return verdict != McKeanVerdict::Other; }
};

/// Sign pattern of m0 up to `tol` (default 1e-10 max|m0|). For a simple
/// change the crossing x0 is the midpoint between the last clearly negative
/// and the first clearly positive sample.
inline McKeanClass mckean_classify(const Field& m0, std::optional<double> tol = std::nullopt) {
  if (!all_finite(m0)) throw InvalidArgument("mckean_classify: m0 is not finite");
  McKeanClass out;
  out.tolerance = tol.value_or(1e-10 * max_abs(m0));
  if (out.tolerance < 0.0) throw InvalidArgument("mckean_classify: tolerance must be >= 0");
  const double t = out.tolerance;
  const std::size_t n = m0.size();

  bool nonneg = true;
  bool nonpos = true;
  std::optional<std::size_t> last_neg;
  std::optional<std::size_t> first_pos;
  for (std::size_t i = 0; i < n; ++i) {
    if (m0[i] < -t) {
      nonneg = false;
      last_neg = i;
    }
    if (m0[i] > t) {
      nonpos = false;
      if (!first_pos) first_pos = i;
    }
  }
  if (nonneg) {
    out.verdict = McKeanVerdict::ConstantSignNonneg;
  } else if (nonpos) {
    out.verdict = McKeanVerdict::ConstantSignNonpos;
  } else if (*last_neg < *first_pos) {
    out.verdict = McKeanVerdict::SimpleChangeNegToPos;
    out.x0 = 0.5 * (m0.x(*last_neg) + m0.x(*first_pos));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Blowup predictors

struct Prediction {
  std::string name;
  bool fired = false;
  double evidence = 0.0;
};

/// Fires iff min u0_x < -||u0||_{H^1} / sqrt(2). Evidence is the margin
/// min_slope + ||u0||_{H^1}/sqrt(2) (negative when fired).
inline Prediction slope_criterion_predict(const Field& u0) {
  if (!all_finite(u0)) throw InvalidArgument("slope_criterion_predict: u0 is not finite");
  const Field ux = derivative(u0);
  const double h1 = std::sqrt(energy(u0, ux));
  const double ms = min_value(ux);
  const double bound = -h1 / std::numbers::sqrt2;
  return {"slope_criterion", ms < bound, ms - bound};
}

struct DecayPredictorConfig {
  /// Outer fraction of [0, L] examined on each side.
  double tail_window = 0.2;
  /// Fires iff evidence < threshold * max|u0|.
  double threshold = 1e-6;
  /// |u0| + |u0_x| below noise_floor * max(|u0| + |u0_x|) is treated as unresolved.
  double noise_floor = 1e-13;
};

struct DecayEvidence {
  Prediction prediction;
  /// Fitted decay rate of the resolved tail per side (plus, minus); NaN when
  /// the side is resolved out to the window and no fit was needed.
  double rate_plus = std::numeric_limits<double>::quiet_NaN();
  double rate_minus = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Minimum of e^{|x|} s(x) over the outer window of one side. Samples beyond
/// the resolved tail are replaced by a log-linear fit of its outer 20%.
inline double side_evidence(const Field& u0, const std::vector<double>& s, bool plus, const DecayPredictorConfig& cfg,
                            double floor, double& fitted_rate) {
  const Grid& g = u0.grid;
  const std::size_t n = g.size();
  const std::size_t centre = n / 2;  // x = 0
  // Indices ordered outward from x = 0 along the chosen side.
  std::vector<std::size_t> idx;
  if (plus) {
    for (std::size_t i = centre; i < n; ++i) idx.push_back(i);
  } else {
    for (std::size_t i = centre + 1; i-- > 0;) idx.push_back(i);
  }
  std::size_t resolved = 0;  // idx[0 .. resolved) all above the floor
  while (resolved < idx.size() && s[idx[resolved]] > floor) ++resolved;

  const double x_window = (1.0 - cfg.tail_window) * g.half_width();
  const bool need_fit = resolved < idx.size();
  double slope = 0.0;
  double intercept = 0.0;
  bool have_fit = false;
  if (need_fit && resolved >= 4) {
    const double r_end = std::abs(g.x(idx[resolved - 1]));
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (std::size_t k = 0; k < resolved; ++k) {
      const double r = std::abs(g.x(idx[k]));
      if (r < 0.8 * r_end) continue;
      const double y = std::log(s[idx[k]]);
      sx += r;
      sy += y;
      sxx += r * r;
      sxy += r * y;
      cnt += 1.0;
    }
    const double den = cnt * sxx - sx * sx;
    if (cnt >= 2.0 && den > 0.0) {
      slope = (cnt * sxy - sx * sy) / den;
      intercept = (sy - slope * sx) / cnt;
      have_fit = true;
      fitted_rate = -slope;
    }
  }

  double ev = kInf;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double r = std::abs(g.x(idx[k]));
    if (r < x_window) continue;
    double val;
    if (k < resolved) {
      val = std::exp(r + std::log(s[idx[k]]));
    } else if (have_fit) {
      val = std::exp(r + intercept + slope * r);
    } else {
      val = 0.0;  // nothing resolved at all: the datum is below the floor here
    }
    ev = std::min(ev, val);
  }
  return ev;
}

}  // namespace detail

/// Finite-window proxy for liminf_{|x|->inf} e^{|x|}(|u0| + |u0_x|) = 0:
/// evidence is the minimum of e^{|x|}(|u0| + |u0_x|) over the outer window on
/// both sides. Tail samples lost in round-off are replaced by the log-linear
/// extrapolation of the resolved tail.
inline DecayEvidence decay_blowup_predict(const Field& u0, const DecayPredictorConfig& cfg = {}) {
  if (!all_finite(u0)) throw InvalidArgument("decay_blowup_predict: u0 is not finite");
  const double peak = max_abs(u0);
  if (!(peak > 0.0)) throw InvalidArgument("decay_blowup_predict: u0 is identically zero");
  if (!(cfg.tail_window > 0.0 && cfg.tail_window <= 1.0)) throw InvalidArgument("decay_blowup_predict: tail_window must be in (0, 1]");
  const Field ux = derivative(u0);
  std::vector<double> s(u0.size());
  double smax = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = std::abs(u0[i]) + std::abs(ux[i]);
    smax = std::max(smax, s[i]);
  }
  const double floor = cfg.noise_floor * smax;
  DecayEvidence out;
  const double ev_plus = detail::side_evidence(u0, s, true, cfg, floor, out.rate_plus);
  const double ev_minus = detail::side_evidence(u0, s, false, cfg, floor, out.rate_minus);
  const double ev = std::min(ev_plus, ev_minus);
  out.prediction = {"decay_blowup", ev < cfg.threshold * peak, ev};
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

struct PersistenceTrace {
  WeightSpec weight;
  double p = kInf;
  /// (t, W(t) = ||u phi||_p + ||u_x phi||_p)
  std::vector<std::pair<double, double>> samples;
  /// (t, M(t) = ||u||_inf + ||u_x||_inf)
  std::vector<std::pair<double, double>> M_samples;

  PersistenceTrace(WeightSpec w, double p_) : weight(std::move(w)), p(p_) {}

  void record(double t, const Field& u, const Field& ux) {
    if (!samples.empty() && !(t > samples.back().first))
      throw InvalidArgument("PersistenceTrace: times must be strictly increasing");
    samples.emplace_back(t, weighted_lp_norm(u, weight, p) + weighted_lp_norm(ux, weight, p));
    M_samples.emplace_back(t, sup_norms(u, ux).m_instant);
  }
};

/// Observer that appends to `trace` at every snapshot.
inline Observer persistence_observer(PersistenceTrace& trace) {
  return [&trace](const Snapshot& s) { trace.record(s.t, s.u, s.ux); };
}

struct PersistenceReport {
  double C_fit = 0.0;
  double W0 = 0.0;
  double W_sup = 0.0;
  bool pass = false;
  /// W overflowed; only [0, valid_until] was used for the fit.
  bool divergence = false;
  double valid_until = 0.0;
  /// max over samples of log W(t) - log W0 - C_fit int_0^t M (<= 0 up to round-off).
  double max_excess = 0.0;
};

/// Fits C = max(0, max_t log(W(t)/W0) / int_0^t M ds) with the time integral by
/// the trapezoid rule over the trace, then checks the bound W(t) <= W0 e^{C int M}
/// at every sample.
inline PersistenceReport persistence_check(const PersistenceTrace& trace, double W0, double tol = 1e-8) {
  if (trace.samples.empty()) throw InvalidArgument("persistence_check: empty trace");
  if (trace.samples.size() != trace.M_samples.size()) throw InvalidArgument("persistence_check: ragged trace");
  PersistenceReport r;
  r.W0 = W0;
  bool all_zero = W0 == 0.0;
  for (const auto& [t, w] : trace.samples) all_zero = all_zero && w == 0.0;
  if (all_zero) {
    r.pass = true;
    r.valid_until = trace.samples.back().first;
    return r;
  }
  if (!(W0 > 0.0)) throw InvalidArgument("persistence_check: W0 must be > 0");

  std::vector<double> int_m(trace.samples.size(), 0.0);
  std::size_t usable = trace.samples.size();
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    if (!std::isfinite(trace.samples[i].second) || !std::isfinite(trace.M_samples[i].second)) {
      usable = i;
      r.divergence = true;
      break;
    }
    if (i > 0) {
      const double dt = trace.M_samples[i].first - trace.M_samples[i - 1].first;
      int_m[i] = int_m[i - 1] + 0.5 * dt * (trace.M_samples[i].second + trace.M_samples[i - 1].second);
    }
  }
  r.valid_until = usable > 0 ? trace.samples[usable - 1].first : trace.samples.front().first;

  const double log_w0 = std::log(W0);
  for (std::size_t i = 0; i < usable; ++i) {
    const double w = trace.samples[i].second;
    r.W_sup = std::max(r.W_sup, w);
    if (int_m[i] > 0.0 && w > 0.0) r.C_fit = std::max(r.C_fit, (std::log(w) - log_w0) / int_m[i]);
  }
  r.max_excess = -kInf;
  bool consistent = true;
  for (std::size_t i = 0; i < usable; ++i) {
    const double w = trace.samples[i].second;
    if (w <= 0.0) continue;
    const double excess = std::log(w) - log_w0 - r.C_fit * int_m[i];
    r.max_excess = std::max(r.max_excess, excess);
    if (excess > tol) consistent = false;
  }
  r.pass = !r.divergence && std::isfinite(r.C_fit) && consistent;
  return r;
}

// ---------------------------------------------------------------------------
// Peakon-rate decay cap

struct RateCapReport {
  double sup = 0.0;
  double C = 0.0;
  bool pass = false;
  /// |x| extent of the region examined (samples above the noise floor).
  double extent = 0.0;
};

/// sup of e^{|x|}(|u| + |u_x|) over the samples whose |u| + |u_x| exceeds
/// noise_floor * max(|u| + |u_x|); pass iff sup <= C.
inline RateCapReport peakon_rate_cap_check(const Field& u, double C, double noise_floor = 1e-11) {
  const Field ux = derivative(u);
  RateCapReport r;
  r.C = C;
  double smax = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) smax = std::max(smax, std::abs(u[i]) + std::abs(ux[i]));
  const double floor = noise_floor * smax;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double s = std::abs(u[i]) + std::abs(ux[i]);
    if (s <= floor || s == 0.0) continue;
    const double ax = std::abs(u.x(i));
    r.sup = std::max(r.sup, std::exp(ax + std::log(s)));
    r.extent = std::max(r.extent, ax);
  }
  r.pass = r.sup <= C;
  return r;
}

// ---------------------------------------------------------------------------
// Blowup report

struct BlowupObservation {
  std::pair<double, double> bracket;
  double min_slope_at_stop = 0.0;
};

struct BlowupReport {
  std::vector<Prediction> predicted;
  std::optional<BlowupObservation> observed;
};

inline BlowupReport make_blowup_report(std::vector<Prediction> predicted, const RunResult& run) {
  BlowupReport r{std::move(predicted), std::nullopt};
  if (run.breaking_bracket) r.observed = BlowupObservation{*run.breaking_bracket, run.final_state.min_slope};
  return r;
}

}  // namespace chlab

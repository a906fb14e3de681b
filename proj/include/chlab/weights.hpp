#pragma once

// Moderate and admissible weight functions.
//
// A weight v is sub-multiplicative when v(x+y) <= v(x) v(y); phi is v-moderate
// when phi(x+y) <= C0 v(x) phi(y). Admissible weights additionally satisfy
// |phi'| <= A phi, inf v > 0 and  \int v(x) e^{-|x|} dx < inf.
//
// Everything is evaluated through log(phi) so that ratios of huge weights do
// not overflow; only an explicitly exponentiated result can become +inf, and
// that is always reported through an `overflow` flag.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chlab/error.hpp"
#include "chlab/field.hpp"
#include "chlab/operators.hpp"
#include "chlab/quadrature.hpp"
#include "chlab/random.hpp"

namespace chlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// phi_{a,b,c,d}(x) = exp(a|x|^b) (1+|x|)^c log(e+|x|)^d
struct StandardFamily {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

/// exp(a x) for x >= 0, 1 for x < 0.
struct OneSided {
  double a = 0.0;
};

/// Strictly positive samples on a uniform table, linearly interpolated.
struct Tabulated {
  double x_min = 0.0;
  double spacing = 1.0;
  std::vector<double> samples;

  double x_max() const { return x_min + spacing * static_cast<double>(samples.size() - 1); }
};

class WeightSpec;

/// min(phi, cap).
struct Truncated {
  std::shared_ptr<const WeightSpec> base;
  double cap = 1.0;
};

class WeightSpec {
 public:
  using Kind = std::variant<StandardFamily, OneSided, Tabulated, Truncated>;

  WeightSpec(Kind kind, std::string description = {}) : kind_(std::move(kind)), description_(std::move(description)) {
    if (const auto* t = std::get_if<Tabulated>(&kind_)) {
      if (t->samples.size() < 2) throw InvalidArgument("Tabulated weight needs at least two samples");
      if (!(t->spacing > 0.0)) throw InvalidArgument("Tabulated weight needs positive spacing");
      for (double s : t->samples)
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("Tabulated weight samples must be finite and > 0");
    }
    if (const auto* tr = std::get_if<Truncated>(&kind_)) {
      if (!tr->base) throw InvalidArgument("Truncated weight without a base");
      if (!(tr->cap > 0.0)) throw InvalidArgument("truncation level N must be > 0");
    }
    if (description_.empty()) description_ = default_description();
  }

  static WeightSpec standard(double a, double b, double c, double d) { return WeightSpec(StandardFamily{a, b, c, d}); }
  static WeightSpec one_sided(double a) { return WeightSpec(OneSided{a}); }
  static WeightSpec constant_one() { return standard(0, 0, 0, 0); }

  /// Tabulates fn on [x_min, x_max] with `count` samples.
  template <class Fn>
  static WeightSpec tabulate(double x_min, double x_max, std::size_t count, Fn&& fn, std::string description = {}) {
    if (count < 2 || !(x_max > x_min)) throw InvalidArgument("tabulate: bad table range");
    Tabulated t{x_min, (x_max - x_min) / static_cast<double>(count - 1), {}};
    t.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) t.samples.push_back(fn(x_min + t.spacing * static_cast<double>(i)));
    return WeightSpec(std::move(t), std::move(description));
  }

  const Kind& kind() const noexcept { return kind_; }
  const std::string& description() const noexcept { return description_; }

 private:
  std::string default_description() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, StandardFamily>)
            return "phi_{" + fmt(k.a) + "," + fmt(k.b) + "," + fmt(k.c) + "," + fmt(k.d) + "}";
          else if constexpr (std::is_same_v<T, OneSided>)
            return "one_sided(" + fmt(k.a) + ")";
          else if constexpr (std::is_same_v<T, Tabulated>)
            return "tabulated[" + std::to_string(k.samples.size()) + "]";
          else
            return "min(" + k.base->description() + "," + fmt(k.cap) + ")";
        },
        kind_);
  }
  static std::string fmt(double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  Kind kind_;
  std::string description_;
};

/// log phi(x). Throws DomainError for tabulated weights queried off-table.
inline double log_weight(const WeightSpec& spec, double x) {
  return std::visit(
      [x](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, StandardFamily>) {
          const double r = std::abs(x);
          double l = 0.0;
          if (k.a != 0.0) l += k.a * (k.b == 0.0 ? 1.0 : std::pow(r, k.b));
          if (k.c != 0.0) l += k.c * std::log1p(r);
          if (k.d != 0.0) l += k.d * std::log(std::log(std::numbers::e + r));
          return l;
        } else if constexpr (std::is_same_v<T, OneSided>) {
          return x > 0.0 ? k.a * x : 0.0;
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          const double pos = (x - k.x_min) / k.spacing;
          const double last = static_cast<double>(k.samples.size() - 1);
          if (!(pos >= -1e-9 && pos <= last + 1e-9))
            throw DomainError("tabulated weight evaluated at x = " + std::to_string(x) + " outside its table");
          const double cl = std::clamp(pos, 0.0, last);
          auto i = static_cast<std::size_t>(std::floor(cl));
          if (i + 1 >= k.samples.size()) i = k.samples.size() - 2;
          const double frac = cl - static_cast<double>(i);
          return std::log((1.0 - frac) * k.samples[i] + frac * k.samples[i + 1]);
        } else {
          return std::min(log_weight(*k.base, x), std::log(k.cap));
        }
      },
      spec.kind());
}

struct WeightValue {
  double value;
  bool overflow;
};

/// phi(x), with +inf and overflow=true when phi(x) exceeds the double range.
inline WeightValue evaluate(const WeightSpec& spec, double x) {
  const double l = log_weight(spec, x);
  if (l > std::log(std::numeric_limits<double>::max())) return {kInf, true};
  return {std::exp(l), false};
}

inline double eval_weight(const WeightSpec& spec, double x) { return evaluate(spec, x).value; }

/// Weight evaluating to min(phi(x), N).
inline WeightSpec truncate_weight(const WeightSpec& spec, double level) {
  return WeightSpec(Truncated{std::make_shared<const WeightSpec>(spec), level});
}

/// d/dx log phi at x: closed form where available, central differences otherwise.
inline double log_derivative(const WeightSpec& spec, double x) {
  if (const auto* s = std::get_if<StandardFamily>(&spec.kind())) {
    const double r = std::abs(x);
    const double sgn = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    double g = 0.0;
    if (s->a != 0.0 && s->b != 0.0) g += s->a * s->b * (s->b == 1.0 ? 1.0 : std::pow(r, s->b - 1.0));
    g += s->c / (1.0 + r);
    g += s->d / ((std::numbers::e + r) * std::log(std::numbers::e + r));
    return sgn * g;
  }
  if (const auto* o = std::get_if<OneSided>(&spec.kind())) return x > 0.0 ? o->a : 0.0;
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (log_weight(spec, x + h) - log_weight(spec, x - h)) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// Sampled constants

struct SampleConfig {
  double range = 10.0;
  std::size_t count = 20000;
  std::uint64_t seed = 1;
  /// Pairs always included in addition to the random ones.
  std::vector<std::pair<double, double>> extra_pairs;

  void validate() const {
    if (count < 2) throw InvalidArgument("sample_count must be >= 2");
    if (!(range > 0.0)) throw InvalidArgument("sample_range must be > 0");
  }
};

/// Deterministic sample pairs: uniform in [-range, range]^2 from the seed,
/// followed by the extra pairs.
inline std::vector<std::pair<double, double>> sample_pairs(const SampleConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(cfg.count + cfg.extra_pairs.size());
  for (std::size_t i = 0; i < cfg.count; ++i) {
    const double x = rng.uniform(-cfg.range, cfg.range);
    const double y = rng.uniform(-cfg.range, cfg.range);
    pairs.emplace_back(x, y);
  }
  pairs.insert(pairs.end(), cfg.extra_pairs.begin(), cfg.extra_pairs.end());
  return pairs;
}

struct SampledSupremum {
  double value = 0.0;
  bool overflow = false;
  double log_value = -kInf;
  double arg_x = 0.0;
  double arg_y = 0.0;
};

namespace detail {

template <class LogRatio>
SampledSupremum sampled_sup(const SampleConfig& cfg, LogRatio&& log_ratio) {
  SampledSupremum out;
  for (const auto& [x, y] : sample_pairs(cfg)) {
    const double l = log_ratio(x, y);
    if (l > out.log_value) {
      out.log_value = l;
      out.arg_x = x;
      out.arg_y = y;
    }
  }
  if (out.log_value > std::log(std::numeric_limits<double>::max())) {
    out.value = kInf;
    out.overflow = true;
  } else {
    out.value = std::exp(out.log_value);
  }
  return out;
}

}  // namespace detail

/// Sampled sup of v(x+y) / (v(x) v(y)). A value <= 1 + tol certifies
/// sub-multiplicativity with constant 1 on the sampled set.
inline SampledSupremum check_submultiplicative(const WeightSpec& v, const SampleConfig& cfg) {
  return detail::sampled_sup(cfg, [&](double x, double y) {
    return log_weight(v, x + y) - log_weight(v, x) - log_weight(v, y);
  });
}

/// Sampled sup of phi(x+y) / (v(x) phi(y)), the empirical moderateness constant C0.
inline SampledSupremum estimate_moderate_constant(const WeightSpec& phi, const WeightSpec& v, const SampleConfig& cfg) {
  return detail::sampled_sup(cfg, [&](double x, double y) {
    return log_weight(phi, x + y) - log_weight(v, x) - log_weight(phi, y);
  });
}

inline SampledSupremum check_submultiplicative(const WeightSpec& v, double range, std::size_t count, std::uint64_t seed) {
  return check_submultiplicative(v, SampleConfig{range, count, seed, {}});
}

inline SampledSupremum estimate_moderate_constant(const WeightSpec& phi, const WeightSpec& v, double range,
                                                  std::size_t count, std::uint64_t seed) {
  return estimate_moderate_constant(phi, v, SampleConfig{range, count, seed, {}});
}

// ---------------------------------------------------------------------------
// Certificates

struct CertifyConfig {
  SampleConfig samples;
  /// Exponents p for ||v e^{-|.|}||_p; +inf allowed.
  std::vector<double> p_values{2.0, kInf};
  double quad_tol = 1e-10;
  double initial_range = 32.0;
  int max_doublings = 12;
};

struct RangeIntegral {
  double value = 0.0;
  bool converged = false;
  double range = 0.0;
};

/// \int_{-R}^{R} exp(log_integrand(x)) dx with R doubling from `initial_range`
/// until the added shell contributes less than `tol`. The integrand is split
/// at 0 and integrated panel by panel.
template <class LogIntegrand>
RangeIntegral doubling_integral(LogIntegrand&& log_integrand, double initial_range, double tol, int max_doublings,
                                double range_cap = kInf) {
  auto f = [&](double x) {
    const double l = log_integrand(x);
    return l > 700.0 ? kInf : std::exp(l);
  };
  const double panel_tol = 1e-16;
  RangeIntegral out;
  double r = std::min(initial_range, range_cap);
  out.value = quad::panel_integral(f, -r, 0.0, panel_tol) + quad::panel_integral(f, 0.0, r, panel_tol);
  out.range = r;
  if (!std::isfinite(out.value)) return out;
  for (int i = 0; i < max_doublings; ++i) {
    const double r2 = std::min(2.0 * r, range_cap);
    if (r2 <= r) {
      out.converged = false;
      return out;
    }
    // An integrand still growing at the new edge cannot settle: report divergence
    // instead of integrating values near overflow.
    const double l_edge = std::max(log_integrand(r), log_integrand(-r));
    const double l_next = std::max(log_integrand(r2), log_integrand(-r2));
    if (l_next > l_edge && l_next > std::log(tol)) {
      out.value = kInf;
      out.range = r2;
      return out;
    }
    const double shell = quad::panel_integral(f, -r2, -r, panel_tol) + quad::panel_integral(f, r, r2, panel_tol);
    out.value += shell;
    out.range = r2;
    r = r2;
    if (!std::isfinite(out.value)) return out;
    if (std::abs(shell) < tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

struct WeightCertificate {
  double C0 = kInf;
  double A = kInf;
  double inf_v = 0.0;
  double integral_v_exp = kInf;
  /// p -> ||v e^{-|.|}||_p (+inf when the doubling test diverges).
  std::map<double, double> lp_v_exp;
  bool admissible = false;
  double sample_range = 0.0;
  std::size_t sample_count = 0;

  std::uint64_t seed = 0;
  double submultiplicative_constant = kInf;
  bool integral_converged = false;
  double integral_range = 0.0;
  bool overflow = false;
  /// Exponents p >= 2 for which v e^{-|.|} is in L^p: the fast-growing-weight
  /// persistence route is available at these p.
  std::vector<double> fast_growth_route_p;
};

namespace detail {

inline double tabulated_range_cap(const WeightSpec& v) {
  if (const auto* t = std::get_if<Tabulated>(&v.kind())) return std::min(-t->x_min, t->x_max());
  return kInf;
}

/// Sampled sup of |phi'| / phi plus the closed-form limits of StandardFamily.
inline double log_derivative_bound(const WeightSpec& phi, const std::vector<double>& xs) {
  double a_sup = 0.0;
  for (double x : xs) a_sup = std::max(a_sup, std::abs(log_derivative(phi, x)));
  if (const auto* s = std::get_if<StandardFamily>(&phi.kind())) {
    if (s->a != 0.0 && s->b > 0.0 && s->b < 1.0) return kInf;  // a b |x|^{b-1} is unbounded at 0
    const double at_zero = std::abs(log_derivative(phi, 1e-300));
    const double at_infinity = (s->b == 1.0) ? std::abs(s->a) : 0.0;
    a_sup = std::max({a_sup, at_zero, at_infinity});
  }
  return a_sup;
}

}  // namespace detail

/// Builds the admissibility certificate for (phi, v). Constants are suprema
/// over the seeded sample set (plus closed-form limits for StandardFamily);
/// the integral uses range doubling and reports divergence instead of a number.
inline WeightCertificate certify_admissible(const WeightSpec& phi, const WeightSpec& v, const CertifyConfig& cfg) {
  WeightCertificate cert;
  cert.sample_range = cfg.samples.range;
  cert.sample_count = cfg.samples.count;
  cert.seed = cfg.samples.seed;

  // Tabulated weights can only be examined on half their table so that x + y stays on it.
  SampleConfig sc = cfg.samples;
  const double cap = std::min(detail::tabulated_range_cap(v), detail::tabulated_range_cap(phi));
  if (std::isfinite(cap)) sc.range = std::min(sc.range, 0.5 * cap);

  const auto c0 = estimate_moderate_constant(phi, v, sc);
  const auto sub = check_submultiplicative(v, sc);
  cert.C0 = c0.value;
  cert.submultiplicative_constant = sub.value;
  cert.overflow = c0.overflow || sub.overflow;

  std::vector<double> xs{0.0};
  for (const auto& [x, y] : sample_pairs(sc)) {
    xs.push_back(x);
    xs.push_back(y);
  }
  cert.A = detail::log_derivative_bound(phi, xs);
  double inf_v = kInf;
  for (double x : xs) inf_v = std::min(inf_v, evaluate(v, x).value);
  cert.inf_v = inf_v;

  auto log_h = [&](double x) { return log_weight(v, x) - std::abs(x); };
  const auto integral = doubling_integral(log_h, cfg.initial_range, cfg.quad_tol, cfg.max_doublings, cap);
  cert.integral_converged = integral.converged;
  cert.integral_range = integral.range;
  cert.integral_v_exp = integral.converged ? integral.value : kInf;

  for (double p : cfg.p_values) {
    if (!(p >= 1.0)) throw InvalidArgument("certify_admissible: p must be >= 1");
    double norm = kInf;
    if (std::isinf(p)) {
      // sup of v e^{-|x|}: dense scan with range doubling until the sup settles.
      double r = std::min(cfg.initial_range, cap);
      auto scan = [&](double lo, double hi) {
        double m = -kInf;
        const double h = 1.0 / 64.0;
        for (double x = lo; x <= hi; x += h) m = std::max({m, log_h(x), log_h(-x)});
        return m;
      };
      double m = scan(0.0, r);
      bool settled = false;
      for (int i = 0; i < cfg.max_doublings; ++i) {
        const double r2 = std::min(2.0 * r, cap);
        if (r2 <= r) break;
        const double m2 = std::max(m, scan(r, r2));
        r = r2;
        if (m2 - m < 1e-12) {
          settled = true;
          m = m2;
          break;
        }
        m = m2;
      }
      norm = settled && m < 700.0 ? std::exp(m) : kInf;
    } else {
      const auto lp = doubling_integral([&](double x) { return p * log_h(x); }, cfg.initial_range,
                                        cfg.quad_tol, cfg.max_doublings, cap);
      norm = lp.converged ? std::pow(lp.value, 1.0 / p) : kInf;
    }
    cert.lp_v_exp[p] = norm;
    if (p >= 2.0 && std::isfinite(norm)) cert.fast_growth_route_p.push_back(p);
  }

  cert.admissible = !cert.overflow && cert.inf_v > 0.0 && std::isfinite(cert.A) && std::isfinite(cert.C0) &&
                    std::isfinite(cert.submultiplicative_constant) && cert.integral_converged;
  return cert;
}

// ---------------------------------------------------------------------------
// Weighted norms and the weighted Young inequality

/// Rectangle-rule ||u phi||_p on the field's grid (p = +inf gives the max).
/// Computed as exp(max log|u phi|) times a scaled sum, so intermediate
/// overflow cannot occur; the result is +inf only when the norm itself is.
inline double weighted_lp_norm(const Field& u, const WeightSpec& phi, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("weighted_lp_norm: p must be >= 1");
  const std::size_t n = u.size();
  std::vector<double> logs(n, -kInf);
  double peak = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] == 0.0) continue;
    logs[i] = std::log(std::abs(u[i])) + log_weight(phi, u.x(i));
    peak = std::max(peak, logs[i]);
  }
  if (peak == -kInf) return 0.0;
  if (std::isinf(p)) return std::exp(peak);
  double s = 0.0;
  for (double l : logs)
    if (l != -kInf) s += std::exp(p * (l - peak));
  return std::exp(peak) * std::pow(s * u.grid.dx(), 1.0 / p);
}

struct YoungReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  /// rhs - lhs, relative to rhs (negative when violated).
  double margin = 0.0;
};

/// Checks ||(f1 * f2) phi||_p <= C0 ||f1 v||_1 ||f2 phi||_p with the discrete
/// convolution of the field module. `rel_slack` absorbs transform round-off.
inline YoungReport check_weighted_young(const Field& f1, const Field& f2, const WeightSpec& v, const WeightSpec& phi,
                                        double p, double c0, double rel_slack = 1e-9) {
  require_same_grid(f1, f2, "check_weighted_young");
  YoungReport r;
  r.lhs = weighted_lp_norm(convolve(f1, f2), phi, p);
  r.rhs = c0 * weighted_lp_norm(f1, v, 1.0) * weighted_lp_norm(f2, phi, p);
  const double abs_slack = 1e-14 * std::max(1.0, weighted_lp_norm(f2, phi, p));
  r.pass = r.lhs <= r.rhs * (1.0 + rel_slack) + abs_slack;
  r.margin = r.rhs > 0.0 ? (r.rhs - r.lhs) / r.rhs : (r.lhs == 0.0 ? 0.0 : -kInf);
  return r;
}

}  // namespace chlab

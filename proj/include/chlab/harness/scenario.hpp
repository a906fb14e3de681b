#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "chlab/diagnostics.hpp"
#include "chlab/harness/config.hpp"
#include "chlab/operators.hpp"
#include "chlab/profiles.hpp"
#include "chlab/solver.hpp"
#include "chlab/weights.hpp"

namespace chlab::harness {

struct MollifiedPeakon {
  double c = 1.0;
  double x0 = 0.0;
  double width = 0.25;
};

/// amplitude * exp(-((x - center) / width)^2)
struct Gaussian {
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
};

/// u0 = (1 - dx^2)^{-1} m0 with m0 chosen for its sign pattern:
///   gaussian:       amplitude * exp(-((x - center)/width)^2)           (constant sign)
///   tanh_gaussian:  amplitude * tanh((x - center)/width) exp(-(x/envelope)^2)  (one - to + change)
struct FromPotential {
  std::string potential = "gaussian";
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
  double envelope = 10.0;
};

/// -amplitude * x * exp(-(x/width)^2): odd, slope -amplitude at 0.
struct OddGaussianDerivative {
  double amplitude = 1.0;
  double width = 1.0;
};

/// amplitude * exp(-rate|x|) smoothed by a Gaussian of standard deviation `width`.
struct MollifiedExponential {
  double amplitude = 1.0;
  double rate = 1.0;
  double width = 0.5;
};

/// Samples read from a text file: one value per line, or "x value" pairs,
/// exactly N rows.
struct FromFile {
  std::string path;
};

using InitialData =
    std::variant<MollifiedPeakon, Gaussian, FromPotential, OddGaussianDerivative, MollifiedExponential, FromFile>;

struct TrackedWeight {
  std::string label;
  WeightSpec phi;
  /// Sub-multiplicative majorant; when absent the default majorant of phi is used.
  std::optional<WeightSpec> v;
  double p = kInf;
  /// Canonical text of phi and v, echoed back into the effective config.
  std::vector<std::pair<std::string, std::string>> phi_keys;
  std::vector<std::pair<std::string, std::string>> v_keys;
};

struct ProfileSettings {
  bool enabled = false;
  double report_interval = 0.05;
  WindowConfig window;
};

struct PredictorSettings {
  bool enabled = true;
  DecayPredictorConfig decay;
  double mckean_rel_tol = 1e-10;
};

struct CertifySettings {
  double sample_range = 10.0;
  std::int64_t sample_count = 20000;
  std::vector<double> p_values{2.0, kInf};
  double quad_tol = 1e-10;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  InitialData initial = Gaussian{};
  double L = 24.0;
  std::size_t N = 4096;
  SolverConfig solver;
  std::vector<TrackedWeight> weights;
  ProfileSettings profiles;
  PredictorSettings predictors;
  CertifySettings certify;
  bool snapshot_tables = true;
  std::vector<std::string> warnings;

  Grid grid() const { return Grid(L, N); }
};

/// phi_{|a|,b,|c|,|d|} for the standard family, e^{|a||x|} for one-sided
/// weights; tabulated weights have no default majorant.
inline std::optional<WeightSpec> default_majorant(const WeightSpec& phi) {
  if (const auto* s = std::get_if<StandardFamily>(&phi.kind()))
    return WeightSpec::standard(std::abs(s->a), s->b, std::abs(s->c), std::abs(s->d));
  if (const auto* o = std::get_if<OneSided>(&phi.kind())) return WeightSpec::standard(std::abs(o->a), 1.0, 0.0, 0.0);
  if (const auto* t = std::get_if<Truncated>(&phi.kind())) return default_majorant(*t->base);
  return std::nullopt;
}

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return std::filesystem::absolute(path).lexically_normal();
}

inline std::vector<std::pair<double, double>> read_columns(const std::filesystem::path& path, std::size_t line,
                                                           const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ParseError(line, field, "cannot open '" + path.string() + "'");
  std::vector<std::pair<double, double>> rows;
  std::string text;
  std::size_t row = 0;
  while (std::getline(in, text)) {
    ++row;
    if (const auto h = text.find('#'); h != std::string::npos) text.resize(h);
    std::istringstream ls(text);
    std::vector<double> vals;
    std::string tok;
    while (ls >> tok) {
      const auto v = parse_number(tok);
      if (!v) throw ParseError(line, field, path.filename().string() + " row " + std::to_string(row) + ": bad number '" + tok + "'");
      vals.push_back(*v);
    }
    if (vals.empty()) continue;
    if (vals.size() == 1) rows.emplace_back(std::numeric_limits<double>::quiet_NaN(), vals[0]);
    else if (vals.size() == 2) rows.emplace_back(vals[0], vals[1]);
    else throw ParseError(line, field, path.filename().string() + " row " + std::to_string(row) + ": expected 1 or 2 columns");
  }
  return rows;
}

using KeyList = std::vector<std::pair<std::string, std::string>>;

inline WeightSpec read_weight(SectionReader& r, const std::filesystem::path& base, KeyList& keys, bool allow_truncate) {
  const std::string kind = r.text("kind", "standard");
  keys.emplace_back("kind", kind);
  std::optional<WeightSpec> spec;
  if (kind == "standard") {
    const double a = r.number("a", 0.0), b = r.number("b", 0.0), c = r.number("c", 0.0), d = r.number("d", 0.0);
    keys.insert(keys.end(), {{"a", format_number(a)}, {"b", format_number(b)}, {"c", format_number(c)}, {"d", format_number(d)}});
    spec = WeightSpec::standard(a, b, c, d);
  } else if (kind == "one_sided") {
    const double a = r.number("a", 0.0);
    keys.emplace_back("a", format_number(a));
    spec = WeightSpec::one_sided(a);
  } else if (kind == "tabulated") {
    const std::size_t line = r.line_of("file");
    const auto path = resolve(base, r.text("file"));
    keys.emplace_back("file", path.string());
    const auto rows = read_columns(path, line, r.qualified("file"));
    if (rows.size() < 2 || std::isnan(rows.front().first))
      throw ParseError(line, r.qualified("file"), "tabulated weight needs at least two 'x value' rows");
    const double x0 = rows.front().first;
    const double h = rows[1].first - rows[0].first;
    Tabulated t{x0, h, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (std::abs(rows[i].first - (x0 + h * static_cast<double>(i))) > 1e-9 * std::max(1.0, std::abs(rows[i].first)))
        throw ParseError(line, r.qualified("file"), "tabulated weight must be on a uniform grid");
      t.samples.push_back(rows[i].second);
    }
    try {
      spec = WeightSpec(std::move(t), "tabulated:" + path.filename().string());
    } catch (const InvalidArgument& e) {
      throw ParseError(line, r.qualified("file"), e.what());
    }
  } else {
    throw ParseError(r.line_of("kind"), r.qualified("kind"), "unknown weight kind '" + kind + "' (standard, one_sided, tabulated)");
  }
  if (allow_truncate && r.has("truncate")) {
    const double n = r.positive("truncate");
    keys.emplace_back("truncate", format_number(n));
    spec = truncate_weight(*spec, n);
  }
  return *spec;
}

}  // namespace detail

/// Samples the initial data on the scenario grid.
inline Field build_initial_data(const Scenario& s) {
  const Grid g = s.grid();
  return std::visit(
      [&](const auto& d) -> Field {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, MollifiedPeakon>) {
          return mollified_peakon(d.c, d.x0, d.width, g);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return sample(g, [&](double x) {
            const double z = (x - d.center) / d.width;
            return d.amplitude * std::exp(-z * z);
          });
        } else if constexpr (std::is_same_v<T, FromPotential>) {
          const Field m0 = d.potential == "gaussian"
                               ? sample(g, [&](double x) {
                                   const double z = (x - d.center) / d.width;
                                   return d.amplitude * std::exp(-z * z);
                                 })
                               : sample(g, [&](double x) {
                                   const double e = x / d.envelope;
                                   return d.amplitude * std::tanh((x - d.center) / d.width) * std::exp(-e * e);
                                 });
          return u_of_m(m0);
        } else if constexpr (std::is_same_v<T, OddGaussianDerivative>) {
          return sample(g, [&](double x) {
            const double z = x / d.width;
            return -d.amplitude * x * std::exp(-z * z);
          });
        } else if constexpr (std::is_same_v<T, MollifiedExponential>) {
          return mollified_exponential(d.amplitude, d.rate, d.width, g);
        } else {
          const auto rows = detail::read_columns(d.path, 0, "initial.path");
          if (rows.size() != g.size())
            throw InvalidArgument("initial data file has " + std::to_string(rows.size()) + " rows, grid has N = " +
                                  std::to_string(g.size()));
          Field u(g);
          for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!std::isnan(rows[i].first) && std::abs(rows[i].first - g.x(i)) > 1e-6 * g.dx())
              throw InvalidArgument("initial data file: x column does not match the grid at row " + std::to_string(i + 1));
            u[i] = rows[i].second;
          }
          return u;
        }
      },
      s.initial);
}

/// Parses scenario text. Relative file paths are resolved against `base_dir`.
/// Every default is filled in; physically invalid combinations are rejected.
inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {}) {
  const ConfigDoc doc = parse_config(text);
  Scenario s;

  for (const auto& sec : doc.sections) {
    const std::string& n = sec.name;
    const bool known = n.empty() || n == "grid" || n == "initial" || n == "solver" || n == "predictors" ||
                       n == "profiles" || n == "certify" || n == "output" || n.rfind("weight.", 0) == 0;
    if (!known) throw ParseError(sec.line, n, "unknown section");
  }

  SectionReader root(doc.find(""), "");
  s.name = root.text("name");
  if (!detail::valid_identifier(s.name) || s.name.find('.') != std::string::npos)
    throw ParseError(root.line_of("name"), "name", "use letters, digits, '-' and '_' only");
  const auto seed = root.integer("seed", 1);
  if (seed < 0) throw ParseError(root.line_of("seed"), "seed", "must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  root.finish();

  SectionReader grid(doc.find("grid"), "grid");
  if (!grid.present()) throw ParseError(0, "grid", "missing [grid] section");
  s.L = grid.positive("L");
  const auto n = grid.integer("N");
  if (n < 64 || (n & (n - 1)) != 0) throw ParseError(grid.line_of("N"), "grid.N", "must be a power of two >= 64");
  s.N = static_cast<std::size_t>(n);
  grid.finish();

  SectionReader init(doc.find("initial"), "initial");
  if (!init.present()) throw ParseError(0, "initial", "missing [initial] section");
  const std::string kind = init.text("kind");
  if (kind == "mollified_peakon") {
    MollifiedPeakon d;
    d.c = init.number("c", d.c);
    d.x0 = init.number("x0", d.x0);
    d.width = init.positive("width", d.width);
    s.initial = d;
  } else if (kind == "gaussian") {
    Gaussian d;
    d.amplitude = init.number("amplitude", d.amplitude);
    d.width = init.positive("width", d.width);
    d.center = init.number("center", d.center);
    s.initial = d;
  } else if (kind == "from_potential") {
    FromPotential d;
    d.potential = init.text("potential", d.potential);
    if (d.potential != "gaussian" && d.potential != "tanh_gaussian")
      throw ParseError(init.line_of("potential"), "initial.potential", "expected gaussian or tanh_gaussian");
    d.amplitude = init.number("amplitude", d.amplitude);
    d.width = init.positive("width", d.width);
    d.center = init.number("center", d.center);
    d.envelope = init.positive("envelope", d.envelope);
    s.initial = d;
  } else if (kind == "odd_gaussian_derivative") {
    OddGaussianDerivative d;
    d.amplitude = init.number("amplitude", d.amplitude);
    d.width = init.positive("width", d.width);
    s.initial = d;
  } else if (kind == "mollified_exponential") {
    MollifiedExponential d;
    d.amplitude = init.number("amplitude", d.amplitude);
    d.rate = init.positive("rate", d.rate);
    d.width = init.positive("width", d.width);
    s.initial = d;
  } else if (kind == "from_file") {
    s.initial = FromFile{detail::resolve(base_dir, init.text("path")).string()};
  } else {
    throw ParseError(init.line_of("kind"), "initial.kind",
                     "unknown initial data '" + kind +
                         "' (mollified_peakon, gaussian, from_potential, odd_gaussian_derivative, "
                         "mollified_exponential, from_file)");
  }
  init.finish();

  SectionReader sol(doc.find("solver"), "solver");
  SolverConfig& c = s.solver;
  c.cfl = sol.number("cfl", c.cfl);
  c.dt_max = sol.number("dt_max", c.dt_max);
  c.dt_floor = sol.number("dt_floor", c.dt_floor);
  c.t_end = sol.number("t_end", c.t_end);
  c.slope_stop = sol.number("slope_stop", c.slope_stop);
  const auto stride = sol.integer("snapshot_stride", c.snapshot_stride);
  if (stride < 1 || stride > 1000000000)
    throw ParseError(sol.line_of("snapshot_stride"), "solver.snapshot_stride", "must be >= 1");
  c.snapshot_stride = static_cast<int>(stride);
  c.dealias = sol.boolean("dealias", c.dealias);
  c.boundary_tol = sol.number("boundary_tol", c.boundary_tol);
  c.initial_boundary_tol = sol.number("initial_boundary_tol", c.initial_boundary_tol);
  sol.finish();
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(sol.line(), "solver", e.what());
  }

  SectionReader pred(doc.find("predictors"), "predictors");
  s.predictors.enabled = pred.boolean("enabled", s.predictors.enabled);
  s.predictors.decay.tail_window = pred.number("tail_window", s.predictors.decay.tail_window);
  if (!(s.predictors.decay.tail_window > 0.0 && s.predictors.decay.tail_window <= 1.0))
    throw ParseError(pred.line_of("tail_window"), "predictors.tail_window", "must lie in (0, 1]");
  s.predictors.decay.threshold = pred.positive("threshold", s.predictors.decay.threshold);
  s.predictors.decay.noise_floor = pred.positive("noise_floor", s.predictors.decay.noise_floor);
  s.predictors.mckean_rel_tol = pred.number("mckean_rel_tol", s.predictors.mckean_rel_tol);
  if (s.predictors.mckean_rel_tol < 0.0)
    throw ParseError(pred.line_of("mckean_rel_tol"), "predictors.mckean_rel_tol", "must be >= 0");
  pred.finish();

  SectionReader prof(doc.find("profiles"), "profiles");
  s.profiles.enabled = prof.boolean("enabled", s.profiles.enabled);
  s.profiles.report_interval = prof.positive("report_interval", s.profiles.report_interval);
  s.profiles.window.noise_floor = prof.positive("noise_floor", s.profiles.window.noise_floor);
  s.profiles.window.factor = prof.positive("window_factor", s.profiles.window.factor);
  s.profiles.window.outer_fraction = prof.positive("outer_fraction", s.profiles.window.outer_fraction);
  if (s.profiles.window.outer_fraction > 1.0)
    throw ParseError(prof.line_of("outer_fraction"), "profiles.outer_fraction", "must lie in (0, 1]");
  prof.finish();

  SectionReader cert(doc.find("certify"), "certify");
  s.certify.sample_range = cert.positive("sample_range", s.certify.sample_range);
  s.certify.sample_count = cert.integer("sample_count", s.certify.sample_count);
  if (s.certify.sample_count < 2) throw ParseError(cert.line_of("sample_count"), "certify.sample_count", "must be >= 2");
  s.certify.p_values = cert.number_list("p_values", s.certify.p_values);
  for (double p : s.certify.p_values)
    if (!(p >= 1.0)) throw ParseError(cert.line_of("p_values"), "certify.p_values", "every p must be >= 1");
  s.certify.quad_tol = cert.positive("quad_tol", s.certify.quad_tol);
  cert.finish();

  SectionReader out(doc.find("output"), "output");
  s.snapshot_tables = out.boolean("snapshot_tables", s.snapshot_tables);
  out.finish();

  for (const auto& sec : doc.sections) {
    if (sec.name.rfind("weight.", 0) != 0) continue;
    const std::string label = sec.name.substr(7);
    if (label.find('.') != std::string::npos) {
      const auto dot = label.find('.');
      if (label.substr(dot + 1) != "v") throw ParseError(sec.line, sec.name, "only a '.v' subsection is allowed");
      if (!doc.find("weight." + label.substr(0, dot))) throw ParseError(sec.line, sec.name, "majorant without its weight section");
      continue;
    }
    SectionReader wr(&sec, sec.name);
    TrackedWeight tw{label, WeightSpec::constant_one(), std::nullopt, kInf, {}, {}};
    tw.phi = detail::read_weight(wr, base_dir, tw.phi_keys, true);
    tw.p = wr.number("p", kInf);
    if (!(tw.p >= 1.0)) throw ParseError(wr.line_of("p"), wr.qualified("p"), "p must be >= 1");
    wr.finish();
    if (const auto* vsec = doc.find(sec.name + ".v")) {
      SectionReader vr(vsec, vsec->name);
      tw.v = detail::read_weight(vr, base_dir, tw.v_keys, false);
      vr.finish();
    }
    if (const auto* sf = std::get_if<StandardFamily>(&tw.phi.kind()); sf && (sf->b > 1.0 || sf->b < 0.0))
      s.warnings.push_back("certification-warning: weight '" + label + "' has b = " + format_number(sf->b) +
                           " outside [0, 1]; moderateness checks are still run and report failure honestly");
    if (!tw.v && !default_majorant(tw.phi))
      s.warnings.push_back("certification-warning: weight '" + label + "' has no majorant; add [" + sec.name + ".v]");
    s.weights.push_back(std::move(tw));
  }

  Field u0 = [&] {
    try {
      return build_initial_data(s);
    } catch (const InvalidArgument& e) {
      throw ParseError(init.line(), "initial", e.what());
    }
  }();
  if (!all_finite(u0)) throw ParseError(init.line(), "initial", "initial data is not finite");
  if (boundary_magnitude(u0) > c.initial_boundary_tol)
    throw ParseError(init.line(), "initial",
                     "initial data reaches |u| = " + format_number(boundary_magnitude(u0)) +
                         " at the domain edge (initial_boundary_tol = " + format_number(c.initial_boundary_tol) +
                         "); enlarge grid.L");
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

/// Fully defaulted configuration text; parsing it yields the same scenario.
inline std::string effective_config(const Scenario& s) {
  std::ostringstream o;
  auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << "\n"; };
  auto num = [&](const std::string& k, double v) { kv(k, format_number(v)); };
  kv("name", s.name);
  kv("seed", std::to_string(s.seed));
  o << "\n[grid]\n";
  num("L", s.L);
  kv("N", std::to_string(s.N));
  o << "\n[initial]\n";
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, MollifiedPeakon>) {
          kv("kind", "mollified_peakon");
          num("c", d.c);
          num("x0", d.x0);
          num("width", d.width);
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          kv("kind", "gaussian");
          num("amplitude", d.amplitude);
          num("width", d.width);
          num("center", d.center);
        } else if constexpr (std::is_same_v<T, FromPotential>) {
          kv("kind", "from_potential");
          kv("potential", d.potential);
          num("amplitude", d.amplitude);
          num("width", d.width);
          num("center", d.center);
          num("envelope", d.envelope);
        } else if constexpr (std::is_same_v<T, OddGaussianDerivative>) {
          kv("kind", "odd_gaussian_derivative");
          num("amplitude", d.amplitude);
          num("width", d.width);
        } else if constexpr (std::is_same_v<T, MollifiedExponential>) {
          kv("kind", "mollified_exponential");
          num("amplitude", d.amplitude);
          num("rate", d.rate);
          num("width", d.width);
        } else {
          kv("kind", "from_file");
          kv("path", d.path);
        }
      },
      s.initial);
  const SolverConfig& c = s.solver;
  o << "\n[solver]\n";
  num("cfl", c.cfl);
  num("dt_max", c.dt_max);
  num("dt_floor", c.dt_floor);
  num("t_end", c.t_end);
  num("slope_stop", c.slope_stop);
  kv("snapshot_stride", std::to_string(c.snapshot_stride));
  kv("dealias", c.dealias ? "true" : "false");
  num("boundary_tol", c.boundary_tol);
  num("initial_boundary_tol", c.initial_boundary_tol);
  o << "\n[predictors]\n";
  kv("enabled", s.predictors.enabled ? "true" : "false");
  num("tail_window", s.predictors.decay.tail_window);
  num("threshold", s.predictors.decay.threshold);
  num("noise_floor", s.predictors.decay.noise_floor);
  num("mckean_rel_tol", s.predictors.mckean_rel_tol);
  o << "\n[profiles]\n";
  kv("enabled", s.profiles.enabled ? "true" : "false");
  num("report_interval", s.profiles.report_interval);
  num("noise_floor", s.profiles.window.noise_floor);
  num("window_factor", s.profiles.window.factor);
  num("outer_fraction", s.profiles.window.outer_fraction);
  o << "\n[certify]\n";
  num("sample_range", s.certify.sample_range);
  kv("sample_count", std::to_string(s.certify.sample_count));
  std::string plist;
  for (std::size_t i = 0; i < s.certify.p_values.size(); ++i)
    plist += (i ? ", " : "") + format_number(s.certify.p_values[i]);
  kv("p_values", plist);
  num("quad_tol", s.certify.quad_tol);
  o << "\n[output]\n";
  kv("snapshot_tables", s.snapshot_tables ? "true" : "false");
  for (const auto& w : s.weights) {
    o << "\n[weight." << w.label << "]\n";
    for (const auto& [k, v] : w.phi_keys) kv(k, v);
    num("p", w.p);
    if (w.v) {
      o << "\n[weight." << w.label << ".v]\n";
      for (const auto& [k, v] : w.v_keys) kv(k, v);
    }
  }
  return o.str();
}

/// 64-bit FNV-1a of the effective config, as 16 hex digits.
inline std::string config_hash(const Scenario& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : effective_config(s)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xf];
  return out;
}

}  // namespace chlab::harness

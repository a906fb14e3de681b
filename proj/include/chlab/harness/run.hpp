#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "chlab/diagnostics.hpp"
#include "chlab/harness/scenario.hpp"
#include "chlab/profiles.hpp"
#include "chlab/solver.hpp"
#include "chlab/weights.hpp"

namespace chlab::harness {

inline constexpr int kSchemaVersion = 1;

using json = nlohmann::ordered_json;

/// JSON has no infinities: non-finite values are written as strings.
inline json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

struct PersistenceRow {
  std::string label;
  std::string weight;
  double p = kInf;
  PersistenceReport report;
};

struct ProfileSummary {
  std::vector<ProfileReport> reports;
  ProfileAmplitudes initial;
  ProfileBounds bounds;
  double max_eps_plus = 0.0;
  double max_eps_minus = 0.0;
  /// max |(u - u0) - reconstruction| / max |u - u0| at the final time.
  double reconstruction_error = 0.0;
  bool remainder_monotone = true;
  std::size_t snapshots = 0;
};

struct RunSummary {
  std::string scenario;
  std::string config_hash;
  std::string effective_config;
  Status status = Status::Running;
  double t_final = 0.0;
  long steps = 0;
  std::optional<std::pair<double, double>> bracket;
  double min_slope_at_stop = 0.0;
  double min_slope_overall = 0.0;
  std::optional<McKeanClass> mckean;
  BlowupReport blowup;
  std::vector<PersistenceRow> persistence;
  std::optional<ProfileSummary> profile;
  double energy_drift = 0.0;
  double mass_drift = 0.0;
  double rate_cap_initial = 0.0;
  double rate_cap_sup = 0.0;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  std::filesystem::path output_dir;
};

// ---------------------------------------------------------------------------
// Predictors

struct PredictorTable {
  McKeanClass mckean;
  std::vector<Prediction> rows;
  double decay_rate_plus = std::numeric_limits<double>::quiet_NaN();
  double decay_rate_minus = std::numeric_limits<double>::quiet_NaN();
};

inline PredictorTable run_predictors(const Field& u0, const PredictorSettings& ps) {
  PredictorTable t;
  const Field m0 = m_of_u(u0);
  t.mckean = mckean_classify(m0, ps.mckean_rel_tol * max_abs(m0));
  t.rows.push_back({"mckean_sign", !t.mckean.predicts_global(), t.mckean.x0.value_or(0.0)});
  t.rows.push_back(slope_criterion_predict(u0));
  if (max_abs(u0) > 0.0) {
    const auto d = decay_blowup_predict(u0, ps.decay);
    t.rows.push_back(d.prediction);
    t.decay_rate_plus = d.rate_plus;
    t.decay_rate_minus = d.rate_minus;
  } else {
    t.rows.push_back({"decay_blowup", false, 0.0});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Output helpers

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string csv_number(double v) { return format_number(v); }

inline std::filesystem::path output_dir_for(const Scenario& s, const std::filesystem::path& out_root) {
  return out_root / (s.name + "-" + config_hash(s));
}

inline json to_json(const WeightCertificate& c) {
  json j;
  j["C0"] = num(c.C0);
  j["A"] = num(c.A);
  j["inf_v"] = num(c.inf_v);
  j["integral_v_exp"] = num(c.integral_v_exp);
  json lp = json::object();
  for (const auto& [p, v] : c.lp_v_exp) lp[format_number(p)] = num(v);
  j["lp_v_exp"] = lp;
  j["admissible"] = c.admissible;
  j["sample_range"] = c.sample_range;
  j["sample_count"] = c.sample_count;
  j["seed"] = c.seed;
  j["submultiplicative_constant"] = num(c.submultiplicative_constant);
  j["integral_converged"] = c.integral_converged;
  j["integral_divergence"] = !c.integral_converged;
  j["integral_range"] = c.integral_range;
  j["overflow"] = c.overflow;
  json route = json::array();
  for (double p : c.fast_growth_route_p) route.push_back(format_number(p));
  j["fast_growth_route_p"] = route;
  return j;
}

inline json to_json(const RunSummary& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = r.scenario;
  j["config_hash"] = r.config_hash;
  j["status"] = std::string(to_string(r.status));
  j["t_final"] = r.t_final;
  j["steps"] = r.steps;
  if (r.bracket) j["breaking_bracket"] = {r.bracket->first, r.bracket->second};
  else j["breaking_bracket"] = nullptr;
  j["min_slope_overall"] = num(r.min_slope_overall);
  json pred = json::array();
  for (const auto& p : r.blowup.predicted) pred.push_back({{"criterion", p.name}, {"fired", p.fired}, {"evidence", num(p.evidence)}});
  json blow;
  blow["predicted"] = pred;
  if (r.blowup.observed)
    blow["observed"] = {{"bracket", {r.blowup.observed->bracket.first, r.blowup.observed->bracket.second}},
                        {"min_slope_at_stop", num(r.blowup.observed->min_slope_at_stop)}};
  else blow["observed"] = nullptr;
  j["blowup"] = blow;
  if (r.mckean) {
    j["mckean"] = {{"verdict", std::string(to_string(r.mckean->verdict))},
                   {"x0", r.mckean->x0 ? json(*r.mckean->x0) : json(nullptr)},
                   {"tolerance", r.mckean->tolerance}};
  }
  json pers = json::array();
  for (const auto& p : r.persistence) {
    pers.push_back({{"label", p.label},
                    {"weight", p.weight},
                    {"p", num(p.p)},
                    {"W0", num(p.report.W0)},
                    {"W_sup", num(p.report.W_sup)},
                    {"C_fit", num(p.report.C_fit)},
                    {"pass", p.report.pass},
                    {"divergence", p.report.divergence},
                    {"valid_until", p.report.valid_until},
                    {"max_excess", num(p.report.max_excess)}});
  }
  j["persistence"] = pers;
  if (r.profile) {
    const auto& p = *r.profile;
    j["profile"] = {{"Phi0", num(p.initial.Phi)},
                    {"Psi0", num(p.initial.Psi)},
                    {"c1", num(p.bounds.c1)},
                    {"c2", num(p.bounds.c2)},
                    {"bounds_pass", p.bounds.pass},
                    {"max_eps_plus", num(p.max_eps_plus)},
                    {"max_eps_minus", num(p.max_eps_minus)},
                    {"final_Phi", p.reports.empty() ? json(nullptr) : num(p.reports.back().Phi)},
                    {"final_Psi", p.reports.empty() ? json(nullptr) : num(p.reports.back().Psi)},
                    {"reconstruction_rel_error", num(p.reconstruction_error)},
                    {"tail_remainder_monotone", p.remainder_monotone},
                    {"snapshots", p.snapshots}};
  } else {
    j["profile"] = nullptr;
  }
  j["conservation"] = {{"energy_rel_drift", num(r.energy_drift)}, {"mass_rel_drift", num(r.mass_drift)}};
  j["peakon_rate"] = {{"initial_constant", num(r.rate_cap_initial)}, {"sup_over_run", num(r.rate_cap_sup)}};
  j["warnings"] = r.warnings;
  j["effective_config"] = r.effective_config;
  return j;
}

// ---------------------------------------------------------------------------
// Running a scenario

struct RunOptions {
  std::filesystem::path out_root = "out";
  bool write_files = true;
  bool quiet = true;
};

inline double relative_drift(double a, double b) {
  const double scale = std::abs(a);
  return scale > 0.0 ? std::abs(b - a) / scale : std::abs(b - a);
}

/// Runs one scenario end to end. Terminal solver statuses (breaking, boundary
/// contamination, ...) are results, not errors.
inline RunSummary run_scenario(const Scenario& s, const RunOptions& opt = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  RunSummary sum;
  sum.scenario = s.name;
  sum.effective_config = effective_config(s);
  sum.config_hash = config_hash(s);
  sum.warnings = s.warnings;

  const Field u0 = build_initial_data(s);

  PredictorTable pred;
  if (s.predictors.enabled) {
    pred = run_predictors(u0, s.predictors);
    sum.mckean = pred.mckean;
  }

  std::vector<PersistenceTrace> traces;
  traces.reserve(s.weights.size());
  for (const auto& w : s.weights) traces.emplace_back(w.phi, w.p);

  std::optional<ProfileAccumulator> acc;
  std::vector<ProfileReport> reports;
  ProfileAmplitudes initial_amp;
  double next_report = 0.0;
  if (s.profiles.enabled) {
    acc.emplace(u0.grid);
    initial_amp = phi0_psi0(u0);
    next_report = s.profiles.report_interval;
  }

  double rate_sup = 0.0;
  double min_slope_all = 0.0;
  std::vector<Observer> observers;
  for (auto& tr : traces) observers.push_back(persistence_observer(tr));
  observers.push_back([&](const Snapshot& snap) {
    min_slope_all = std::min(min_slope_all, min_value(snap.ux));
    if (max_abs(snap.u) > 0.0) rate_sup = std::max(rate_sup, peakon_rate_cap_check(snap.u, kInf).sup);
  });
  if (acc) {
    observers.push_back([&](const Snapshot& snap) {
      accumulate(*acc, snap.u, snap.ux, snap.t);
      const bool last = snap.status != Status::Running;
      if (snap.t > 0.0 && (snap.t >= next_report * (1.0 - 1e-12) || last)) {
        reports.push_back(make_profile_report(*acc, snap.u, u0, initial_amp, s.profiles.window));
        while (next_report <= snap.t * (1.0 + 1e-12)) next_report += s.profiles.report_interval;
      }
    });
  }

  const RunResult res = run(u0, s.solver, observers);
  const SolverState& fin = res.final_state;
  sum.status = fin.status;
  sum.t_final = fin.t;
  sum.steps = fin.step_count;
  sum.bracket = res.breaking_bracket;
  sum.min_slope_at_stop = fin.min_slope;
  sum.min_slope_overall = min_slope_all;
  sum.blowup = make_blowup_report(pred.rows, res);
  if (max_abs(u0) > 0.0) sum.rate_cap_initial = peakon_rate_cap_check(u0, kInf).sup;
  sum.rate_cap_sup = rate_sup;

  if (!res.log.empty()) {
    sum.energy_drift = relative_drift(res.log.front().energy, res.log.back().energy);
    sum.mass_drift = relative_drift(res.log.front().mass, res.log.back().mass);
  }

  for (std::size_t i = 0; i < traces.size(); ++i) {
    PersistenceRow row{s.weights[i].label, s.weights[i].phi.description(), s.weights[i].p, {}};
    row.report = persistence_check(traces[i], traces[i].samples.front().second);
    sum.persistence.push_back(row);
  }

  if (acc) {
    ProfileSummary ps;
    ps.initial = initial_amp;
    ps.reports = reports;
    ps.snapshots = acc->n_snapshots;
    if (!reports.empty()) {
      ps.bounds = profile_bounds_check(reports);
      double c1 = kInf, c2 = 0.0;
      for (auto& r : ps.reports) {
        c1 = std::min({c1, r.Phi, r.Psi});
        c2 = std::max({c2, r.Phi, r.Psi});
        r.c1 = c1;
        r.c2 = c2;
        ps.max_eps_plus = std::max(ps.max_eps_plus, r.residual_plus.max_abs());
        ps.max_eps_minus = std::max(ps.max_eps_minus, r.residual_minus.max_abs());
      }
    }
    if (acc->t_last > acc->t_first && fin.status != Status::NonFinite) {
      const Field rec = reconstruct_increment(*acc, s.solver.dealias);
      Field incr = fin.u;
      incr -= u0;
      const double scale = max_abs(incr);
      ps.reconstruction_error = scale > 0.0 ? max_abs_difference(rec, incr) / scale : max_abs(rec);
      for (Side side : {Side::Plus, Side::Minus}) {
        const auto win = tail_window(u0, side, s.profiles.window);
        if (win) ps.remainder_monotone = ps.remainder_monotone && tail_remainder_monotone(tail_remainder(*acc, side), *win, side);
      }
    }
    sum.profile = std::move(ps);
  }

  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  if (opt.write_files) {
    namespace fs = std::filesystem;
    sum.output_dir = output_dir_for(s, opt.out_root);
    fs::create_directories(sum.output_dir);

    std::ostringstream log;
    log << "t,dt,min_slope,u_inf,ux_inf,energy,mass";
    for (std::size_t i = 0; i < traces.size(); ++i) log << ",W_" << (i + 1);
    log << "\n";
    for (std::size_t k = 0; k < res.log.size(); ++k) {
      const auto& r = res.log[k];
      log << csv_number(r.t) << ',' << csv_number(r.dt) << ',' << csv_number(r.min_slope) << ',' << csv_number(r.u_inf)
          << ',' << csv_number(r.ux_inf) << ',' << csv_number(r.energy) << ',' << csv_number(r.mass);
      for (const auto& tr : traces) log << ',' << csv_number(tr.samples[k].second);
      log << "\n";
    }
    write_text(sum.output_dir / "run_log.csv", log.str());

    std::ostringstream pc;
    pc << "criterion,fired,evidence\n";
    for (const auto& p : sum.blowup.predicted) pc << p.name << ',' << (p.fired ? 1 : 0) << ',' << csv_number(p.evidence) << "\n";
    write_text(sum.output_dir / "predictors.csv", pc.str());

    if (sum.profile) {
      std::ostringstream prof;
      prof << "t,Phi,Psi,c1,c2,max_eps_plus,max_eps_minus\n";
      for (const auto& r : sum.profile->reports)
        prof << csv_number(r.t) << ',' << csv_number(r.Phi) << ',' << csv_number(r.Psi) << ',' << csv_number(r.c1) << ','
             << csv_number(r.c2) << ',' << csv_number(r.residual_plus.max_abs()) << ','
             << csv_number(r.residual_minus.max_abs()) << "\n";
      write_text(sum.output_dir / "profile_log.csv", prof.str());
      if (!sum.profile->reports.empty()) {
        const auto& last = sum.profile->reports.back();
        std::ostringstream rt;
        rt << "side,x,eps\n";
        for (const auto& [x, e] : last.residual_plus.values) rt << "plus," << csv_number(x) << ',' << csv_number(e) << "\n";
        for (const auto& [x, e] : last.residual_minus.values) rt << "minus," << csv_number(x) << ',' << csv_number(e) << "\n";
        write_text(sum.output_dir / "profile_residuals.csv", rt.str());
      }
    }

    if (s.snapshot_tables) {
      auto table = [&](const Field& u) {
        const Field ux = derivative(u);
        std::ostringstream o;
        o << "# x u u_x\n";
        for (std::size_t i = 0; i < u.size(); ++i)
          o << csv_number(u.x(i)) << ' ' << csv_number(u[i]) << ' ' << csv_number(ux[i]) << "\n";
        return o.str();
      };
      write_text(sum.output_dir / "snapshot_initial.txt", table(u0));
      write_text(sum.output_dir / "snapshot_final.txt", table(fin.u));
    }
    write_text(sum.output_dir / "effective_config.ini", sum.effective_config);
    write_text(sum.output_dir / "summary.json", to_json(sum).dump(2) + "\n");
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Weight certification and prediction-only classification

struct CertificationRow {
  std::string label;
  std::string phi;
  std::string v;
  WeightCertificate certificate;
  std::vector<std::string> notes;
};

inline std::vector<CertificationRow> certify_weights(const Scenario& s) {
  std::vector<CertificationRow> rows;
  CertifyConfig cfg;
  cfg.samples = SampleConfig{s.certify.sample_range, static_cast<std::size_t>(s.certify.sample_count), s.seed, {}};
  cfg.p_values = s.certify.p_values;
  cfg.quad_tol = s.certify.quad_tol;
  for (const auto& w : s.weights) {
    CertificationRow row{w.label, w.phi.description(), "", {}, {}};
    const auto v = w.v ? w.v : default_majorant(w.phi);
    if (!v) {
      row.notes.push_back("no majorant available; certificate not computed");
      rows.push_back(row);
      continue;
    }
    row.v = v->description();
    row.certificate = certify_admissible(w.phi, *v, cfg);
    if (const auto* sf = std::get_if<StandardFamily>(&w.phi.kind()); sf && (sf->b > 1.0 || sf->b < 0.0))
      row.notes.push_back("b outside [0, 1]: not a certified family member");
    if (row.certificate.overflow) row.notes.push_back("weight ratio overflowed on the sample set");
    if (!row.certificate.integral_converged) row.notes.push_back("integral of v e^{-|x|} did not converge under range doubling");
    rows.push_back(row);
  }
  return rows;
}

inline json certification_json(const Scenario& s, const std::vector<CertificationRow>& rows) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = s.name;
  json arr = json::array();
  for (const auto& r : rows) {
    json e;
    e["label"] = r.label;
    e["phi"] = r.phi;
    e["v"] = r.v;
    e["certificate"] = r.v.empty() ? json(nullptr) : to_json(r.certificate);
    e["notes"] = r.notes;
    arr.push_back(e);
  }
  j["weights"] = arr;
  return j;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  std::string value;
  std::optional<RunSummary> summary;
  std::string error;
};

using Override = std::pair<std::string, std::string>;

/// Applies `axis = value` pairs (axis is "section.key" or a root key) to the
/// scenario text and re-parses it. A non-empty `name_suffix` is appended to
/// the scenario name.
inline Scenario with_overrides(std::string_view text, const std::filesystem::path& base_dir,
                               const std::vector<Override>& overrides, const std::string& name_suffix = {}) {
  ConfigDoc doc = parse_config(text);
  for (const auto& [axis, value] : overrides) {
    const auto dot = axis.rfind('.');
    const std::string section = dot == std::string::npos ? "" : axis.substr(0, dot);
    const std::string key = dot == std::string::npos ? axis : axis.substr(dot + 1);
    if (!section.empty() && !doc.find(section))
      throw InvalidArgument("override '" + axis + "': no section [" + section + "]");
    doc.set(section, key, value);
  }
  if (!name_suffix.empty()) {
    std::string name;
    for (const auto& e : doc.root().entries)
      if (e.key == "name") name = e.value;
    std::string suffix = name_suffix;
    for (char& ch : suffix)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')) ch = '_';
    doc.set("", "name", name + "-" + suffix);
  }
  std::ostringstream o;
  for (const auto& sec : doc.sections) {
    if (!sec.name.empty()) o << "[" << sec.name << "]\n";
    for (const auto& e : sec.entries) o << e.key << " = " << e.value << "\n";
  }
  return parse_scenario(o.str(), base_dir);
}

/// One independent run per value on a bounded pool of worker threads. A
/// failure (bad value, exception) is confined to its own row.
inline std::vector<SweepRow> sweep(std::string_view text, const std::filesystem::path& base_dir, const std::string& axis,
                                   const std::vector<std::string>& values, const RunOptions& opt,
                                   const std::vector<Override>& fixed = {},
                                   unsigned workers = std::max(1u, std::thread::hardware_concurrency())) {
  std::vector<SweepRow> rows(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) rows[i].value = values[i];
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        if (!parse_number(values[i])) throw InvalidArgument("sweep value '" + values[i] + "' is not a number");
        auto ov = fixed;
        ov.emplace_back(axis, values[i]);
        const auto dot = axis.rfind('.');
        const Scenario s = with_overrides(text, base_dir, ov, (dot == std::string::npos ? axis : axis.substr(dot + 1)) + values[i]);
        rows[i].summary = run_scenario(s, opt);
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(values.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

inline std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows) {
  std::ostringstream o;
  o << axis << ",status,t_final,t_lo,t_hi,min_slope,mckean,decay_blowup_fired,energy_rel_drift,error\n";
  for (const auto& r : rows) {
    o << r.value << ',';
    if (!r.summary) {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      o << "Error,,,,,,,," << err << "\n";
      continue;
    }
    const auto& s = *r.summary;
    o << to_string(s.status) << ',' << csv_number(s.t_final) << ',';
    if (s.bracket) o << csv_number(s.bracket->first) << ',' << csv_number(s.bracket->second);
    else o << ',';
    o << ',' << csv_number(s.min_slope_overall) << ',' << (s.mckean ? std::string(to_string(s.mckean->verdict)) : "");
    bool decay = false;
    for (const auto& p : s.blowup.predicted)
      if (p.name == "decay_blowup") decay = p.fired;
    o << ',' << (decay ? 1 : 0) << ',' << csv_number(s.energy_drift) << ",\n";
  }
  return o.str();
}

}  // namespace chlab::harness

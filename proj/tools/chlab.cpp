#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "acceptance/suite.hpp"
#include "chlab/chlab.hpp"
#include "chlab/harness/harness.hpp"

namespace fs = std::filesystem;
using namespace chlab;
using namespace chlab::harness;

namespace {

struct Globals {
  std::string out = "out";
  std::optional<std::int64_t> seed;
  bool quiet = false;
};

struct ConfigSource {
  std::string text;
  fs::path base_dir;
};

// A config argument is either a path or the name of a bundled scenario.
ConfigSource read_config(const std::string& arg) {
  fs::path p(arg);
  if (!fs::exists(p)) {
    const fs::path builtin = fs::path(CHLAB_CONFIG_DIR) / (arg + ".ini");
    if (!fs::exists(builtin)) throw Error("no such config file or builtin scenario: '" + arg + "'");
    p = builtin;
  }
  std::ifstream in(p);
  if (!in) throw Error("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return {ss.str(), p.parent_path()};
}

Scenario load(const std::string& arg, const Globals& g) {
  const auto src = read_config(arg);
  if (g.seed) return with_overrides(src.text, src.base_dir, {{"seed", std::to_string(*g.seed)}});
  return parse_scenario(src.text, src.base_dir);
}

void print_warnings(const std::vector<std::string>& w) {
  for (const auto& s : w) std::fprintf(stderr, "warning: %s\n", s.c_str());
}

void print_summary(const RunSummary& s) {
  std::printf("%s: %s at t = %s after %ld steps", s.scenario.c_str(), std::string(to_string(s.status)).c_str(),
              format_number(s.t_final).c_str(), s.steps);
  if (s.bracket)
    std::printf(", breakdown in [%s, %s]", format_number(s.bracket->first).c_str(), format_number(s.bracket->second).c_str());
  std::printf("\n  min slope %s, energy drift %s\n", format_number(s.min_slope_overall).c_str(),
              format_number(s.energy_drift).c_str());
  for (const auto& p : s.blowup.predicted)
    std::printf("  predictor %-16s %s (evidence %s)\n", p.name.c_str(), p.fired ? "fired" : "silent",
                format_number(p.evidence).c_str());
  for (const auto& w : s.persistence)
    std::printf("  weight %-16s C_fit %s, W_sup %s, %s\n", w.label.c_str(), format_number(w.report.C_fit).c_str(),
                format_number(w.report.W_sup).c_str(), w.report.pass ? "bounded" : "NOT bounded");
  if (s.profile && !s.profile->reports.empty()) {
    const auto& r = s.profile->reports.back();
    std::printf("  profiles at t = %s: Phi %s, Psi %s, max|eps| %s / %s, reconstruction %s\n", format_number(r.t).c_str(),
                format_number(r.Phi).c_str(), format_number(r.Psi).c_str(), format_number(r.residual_plus.max_abs()).c_str(),
                format_number(r.residual_minus.max_abs()).c_str(), format_number(s.profile->reconstruction_error).c_str());
  }
  std::printf("  output: %s\n", s.output_dir.string().c_str());
}

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(list);
  while (std::getline(in, cur, ',')) {
    const auto t = harness::detail::trim(cur);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camassa-Holm numerical laboratory"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "Output root directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Override the scenario seed");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  std::string config;

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its outputs");
  simulate->add_option("config", config, "Scenario file or builtin name")->required();

  auto* weights = app.add_subcommand("weights", "Weight utilities");
  weights->require_subcommand(1);
  auto* certify = weights->add_subcommand("certify", "Certify the weights declared in a scenario");
  certify->add_option("config", config, "Scenario file or builtin name")->required();

  auto* classify = app.add_subcommand("classify", "Evaluate blowup and global-existence predictors on the initial data");
  classify->add_option("config", config, "Scenario file or builtin name")->required();

  auto* profile = app.add_subcommand("profile", "Run a scenario with tail-profile tracking enabled");
  profile->add_option("config", config, "Scenario file or builtin name")->required();

  std::string axis, values;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one scenario per value of a config key");
  sweep_cmd->add_option("config", config, "Scenario file or builtin name")->required();
  sweep_cmd->add_option("--axis", axis, "Key to vary, as section.key")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  bool slow = false;
  std::vector<int> only;
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance criteria");
  selftest->add_flag("--slow", slow, "Include the long decay-rate sweep");
  selftest->add_option("--only", only, "Run only these criterion ids");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunOptions ro{g.out, true, g.quiet};

    if (*simulate || *profile) {
      Scenario s = load(config, g);
      if (*profile) s.profiles.enabled = true;
      print_warnings(s.warnings);
      const auto sum = run_scenario(s, ro);
      if (!g.quiet) print_summary(sum);
      return 0;
    }

    if (*certify) {
      const Scenario s = load(config, g);
      print_warnings(s.warnings);
      const auto rows = certify_weights(s);
      const fs::path dir = output_dir_for(s, g.out);
      fs::create_directories(dir);
      write_text(dir / "certification.json", certification_json(s, rows).dump(2) + "\n");
      if (!g.quiet) {
        for (const auto& r : rows) {
          if (r.v.empty()) {
            std::printf("%-16s %s: no certificate\n", r.label.c_str(), r.phi.c_str());
            continue;
          }
          const auto& c = r.certificate;
          std::printf("%-16s phi %s, v %s: C0 %s, A %s, int v e^-|x| %s, %s\n", r.label.c_str(), r.phi.c_str(), r.v.c_str(),
                      format_number(c.C0).c_str(), format_number(c.A).c_str(), format_number(c.integral_v_exp).c_str(),
                      c.admissible ? "admissible" : "not admissible");
          for (const auto& n : r.notes) std::printf("  note: %s\n", n.c_str());
        }
        std::printf("output: %s\n", (dir / "certification.json").string().c_str());
      }
      return 0;
    }

    if (*classify) {
      const Scenario s = load(config, g);
      print_warnings(s.warnings);
      const Field u0 = build_initial_data(s);
      json j;
      j["schema_version"] = kSchemaVersion;
      j["scenario"] = s.name;
      j["config_hash"] = config_hash(s);
      if (max_abs(u0) == 0.0) {
        j["predictors"] = json::array();
        j["note"] = "initial data is identically zero: global solution";
      } else {
        const auto t = run_predictors(u0, s.predictors);
        json arr = json::array();
        for (const auto& r : t.rows) arr.push_back({{"criterion", r.name}, {"fired", r.fired}, {"evidence", num(r.evidence)}});
        j["predictors"] = arr;
        j["mckean"] = {{"verdict", std::string(to_string(t.mckean.verdict))},
                       {"x0", t.mckean.x0 ? json(*t.mckean.x0) : json(nullptr)},
                       {"tolerance", t.mckean.tolerance}};
        j["decay_rates"] = {{"plus", num(t.decay_rate_plus)}, {"minus", num(t.decay_rate_minus)}};
        if (!g.quiet) {
          std::printf("%s: McKean pattern %s\n", s.name.c_str(), std::string(to_string(t.mckean.verdict)).c_str());
          for (const auto& r : t.rows)
            std::printf("  %-16s %s (evidence %s)\n", r.name.c_str(), r.fired ? "fired" : "silent",
                        format_number(r.evidence).c_str());
        }
      }
      const fs::path dir = output_dir_for(s, g.out);
      fs::create_directories(dir);
      write_text(dir / "classification.json", j.dump(2) + "\n");
      return 0;
    }

    if (*sweep_cmd) {
      const auto src = read_config(config);
      const auto vals = split_values(values);
      std::vector<Override> fixed;
      if (g.seed) fixed.emplace_back("seed", std::to_string(*g.seed));
      // Parse once up front so a malformed base config is reported as such.
      const Scenario base = fixed.empty() ? parse_scenario(src.text, src.base_dir) : with_overrides(src.text, src.base_dir, fixed);
      const auto rows = sweep(src.text, src.base_dir, axis, vals, ro, fixed, workers);
      const std::string csv = sweep_csv(axis, rows);
      const fs::path dir = fs::path(g.out) / (base.name + "-sweep");
      fs::create_directories(dir);
      write_text(dir / "sweep.csv", csv);
      if (!g.quiet) std::printf("%soutput: %s\n", csv.c_str(), (dir / "sweep.csv").string().c_str());
      return 0;
    }

    if (*selftest) {
      acceptance::SuiteOptions opt;
      opt.out_root = fs::path(g.out) / "selftest";
      opt.include_slow = slow;
      opt.only.insert(only.begin(), only.end());
      const auto results = acceptance::run_suite(opt, g.quiet ? std::fopen("/dev/null", "w") : stdout);
      int failed = 0;
      for (const auto& r : results) failed += r.pass ? 0 : 1;
      std::printf("selftest: %zu criteria, %d failed\n", results.size(), failed);
      return failed == 0 ? 0 : 1;
    }
  } catch (const ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

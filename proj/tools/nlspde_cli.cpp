// nlspde: gate checks, scenario runs, oracles and the acceptance suite from the command line.
#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "nlspde/acceptance.hpp"
#include "nlspde/harness.hpp"

using namespace nlspde;

namespace {

int code(ExitCode c) { return static_cast<int>(c); }

CovarianceSpec parse_kernel(const std::string& name, double beta) {
  if (name == "white") return CovarianceSpec::white();
  if (name == "riesz") return CovarianceSpec::riesz(beta);
  if (name == "ou") return CovarianceSpec::ou(beta);
  if (name == "flat") return CovarianceSpec::flat();
  throw ConfigError("unknown kernel '" + name + "'");
}

Theorem parse_theorem(const std::string& name) {
  if (name == "semilinear") return Theorem::semilinear;
  if (name == "colored") return Theorem::colored;
  if (name == "superlinear") return Theorem::superlinear;
  throw ConfigError("unknown theorem '" + name + "'");
}

GateVerdict validate(Theorem t, const ParameterSet& ps) {
  switch (t) {
    case Theorem::semilinear: return validate_semilinear(ps);
    case Theorem::colored: return validate_colored(ps);
    case Theorem::superlinear: return validate_superlinear(ps);
  }
  return {};
}

// A parameter block given by flags; a config or preset seeds it, flags override.
struct GateArgs {
  std::string config, preset, theorem, kernel;
  std::map<std::string, double> values;
  std::optional<bool> convex, isotropic;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config, "scenario config file");
    sub->add_option("--preset", preset, "built-in scenario");
    sub->add_option("--theorem", theorem, "semilinear | colored | superlinear");
    sub->add_option("--kernel", kernel, "white | riesz | ou | flat");
    for (const char* k : {"d", "alpha", "p", "theta", "gamma", "lambda", "s", "theta0", "beta"})
      sub->add_option(std::string("--") + k, values[k]);
    sub->add_option("--convex", convex, "domain convexity");
    sub->add_option("--isotropic", isotropic, "fractional Laplacian operator");
  }

  std::pair<Theorem, ParameterSet> resolve() const {
    Theorem t = Theorem::colored;
    ParameterSet ps;
    if (!config.empty() || !preset.empty()) {
      const ScenarioConfig cfg = config.empty() ? preset_config(preset) : load_config(config);
      t = cfg.theorem;
      ps = cfg.gate;
      ps.d = cfg.domain.dim();
      ps.alpha = cfg.alpha;
      ps.domain_convex = cfg.domain.convex();
      ps.isotropic = cfg.presets.measure == "isotropic";
      ps.kernel = cfg.noise;
      if (t == Theorem::superlinear) ps.lambda = cfg.superlinear.lambda;
    }
    if (!theorem.empty()) t = parse_theorem(theorem);
    return {t, apply(ps)};
  }

  ParameterSet apply(ParameterSet ps) const {
    auto set = [&](const char* k, double& field) {
      if (auto it = values.find(k); it != values.end() && !std::isnan(it->second)) field = it->second;
    };
    if (auto it = values.find("d"); it != values.end() && !std::isnan(it->second)) ps.d = int(it->second);
    set("alpha", ps.alpha);
    set("p", ps.p);
    set("theta", ps.theta);
    set("gamma", ps.gamma);
    set("lambda", ps.lambda);
    set("s", ps.s);
    set("theta0", ps.theta0);
    double beta = ps.kernel.beta;
    set("beta", beta);
    if (!kernel.empty()) ps.kernel = parse_kernel(kernel, beta);
    else ps.kernel.beta = beta;
    if (convex) ps.domain_convex = *convex;
    if (isotropic) ps.isotropic = *isotropic;
    return ps;
  }
};

void nan_defaults(GateArgs& g) {
  for (auto& [k, v] : g.values) v = std::nan("");
}

ScenarioConfig scenario(const std::string& config, const std::string& preset) {
  if (config.empty() == preset.empty()) throw ConfigError("give exactly one of --config and --preset");
  return config.empty() ? preset_config(preset) : load_config(config);
}

bool set_field(ParameterSet& ps, const std::string& name, double v) {
  if (name == "d") ps.d = int(v);
  else if (name == "alpha") ps.alpha = v;
  else if (name == "p") ps.p = v;
  else if (name == "theta") ps.theta = v;
  else if (name == "gamma") ps.gamma = v;
  else if (name == "lambda") ps.lambda = v;
  else if (name == "s") ps.s = v;
  else if (name == "theta0") ps.theta0 = v;
  else if (name == "beta") ps.kernel.beta = v;
  else return false;
  return true;
}

struct Axis {
  std::string name;
  double lo = 0, hi = 0;
  int n = 1;
};

// name:lo:hi:n
Axis parse_axis(const std::string& text) {
  Axis a;
  std::stringstream ss(text);
  std::string part[4];
  for (auto& p : part)
    if (!std::getline(ss, p, ':')) throw ConfigError("axis '" + text + "' is not name:lo:hi:n");
  a.name = part[0];
  try {
    a.lo = std::stod(part[1]);
    a.hi = std::stod(part[2]);
    a.n = std::stoi(part[3]);
  } catch (const std::exception&) {
    throw ConfigError("axis '" + text + "' has a bad number");
  }
  if (a.n < 1) throw ConfigError("axis '" + text + "' needs n >= 1");
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted-Sobolev SPDE toolkit"};
  app.require_subcommand(1);

  // gate
  GateArgs gate_args;
  auto* gate = app.add_subcommand("gate", "print the clause table; exit 0 on pass, 1 on fail");
  gate_args.attach(gate);

  // dalang
  GateArgs dal_args;
  auto* dalang = app.add_subcommand("dalang", "integrability condition for one kernel");
  dal_args.attach(dalang);

  // solve
  std::string cfg_path, preset;
  long paths = -1;
  std::uint64_t seed = 0;
  bool override_gate = false;
  std::string out_dir;
  auto* solve = app.add_subcommand("solve", "run a scenario and write CSV files plus a manifest");
  solve->add_option("--config", cfg_path, "scenario config file");
  solve->add_option("--preset", preset, "built-in scenario");
  solve->add_option("--paths", paths, "number of sample paths");
  auto* seed_opt = solve->add_option("--seed", seed, "master seed");
  solve->add_flag("--override-gate", override_gate, "run even when the gate fails");
  solve->add_option("--out", out_dir, "output directory (default SPDE_OUT_DIR or spde_out)");

  // verify
  std::string vcfg, vpreset;
  long vpaths = -1;
  std::uint64_t vseed = 0;
  auto* verify = app.add_subcommand("verify", "run the positivity and refinement suites of a scenario");
  verify->add_option("--config", vcfg, "scenario config file");
  verify->add_option("--preset", vpreset, "built-in scenario");
  verify->add_option("--paths", vpaths, "number of sample paths");
  auto* vseed_opt = verify->add_option("--seed", vseed, "master seed");

  // oracle
  std::string okind = "getoor";
  double oalpha = 1.0, ox = 0.0, ot = 1.0, odt = 1e-3;
  int od = 1;
  long opaths = 10000;
  std::uint64_t oseed = 20240601;
  auto* oracle = app.add_subcommand("oracle", "reference values: Getoor ball solution or the Duhamel Monte Carlo");
  oracle->add_option("--kind", okind, "getoor | duhamel")->check(CLI::IsMember({"getoor", "duhamel"}));
  oracle->add_option("--alpha", oalpha);
  oracle->add_option("--d", od)->check(CLI::Range(1, 2));
  oracle->add_option("--x", ox, "radius (getoor) or point in (-1, 1) (duhamel)");
  oracle->add_option("--t", ot, "time horizon (duhamel, f = 1, u0 = 0)");
  oracle->add_option("--dt", odt, "substep (duhamel)");
  oracle->add_option("--paths", opaths);
  oracle->add_option("--seed", oseed);

  // sweep
  GateArgs sw_args;
  std::vector<std::string> axes;
  auto* sweep = app.add_subcommand("sweep", "evaluate the gate over a parameter grid, CSV to stdout");
  sw_args.attach(sweep);
  sweep->add_option("--axis", axes, "name:lo:hi:n, repeatable")->required();

  // suite
  std::vector<int> only;
  std::uint64_t sseed = 20240601;
  auto* suite = app.add_subcommand("suite", "acceptance suite");
  suite->add_option("--only", only, "criterion ids")->check(CLI::Range(1, 9));
  suite->add_option("--seed", sseed);

  nan_defaults(gate_args);
  nan_defaults(dal_args);
  nan_defaults(sw_args);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::config_error);
  }

  try {
    if (*gate) {
      auto [t, ps] = gate_args.resolve();
      const GateVerdict v = validate(t, ps);
      std::printf("theorem: %s\n%s", theorem_name(t).c_str(), v.table().c_str());
      return v.pass ? 0 : 1;
    }
    if (*dalang) {
      auto [t, ps] = dal_args.resolve();
      (void)t;
      const DalangVerdict v = dalang_check(ps.kernel, ps.s, ps.gamma, ps.alpha, ps.d);
      std::printf("%s kernel=%s d=%d alpha=%.17g gamma=%.17g s=%.17g branch=%s kappa=%.17g integral=%.17g\n",
                  v.pass ? "pass" : "fail", ps.kernel.name().c_str(), ps.d, ps.alpha, ps.gamma, ps.s,
                  branch_name(v.branch).c_str(), v.kappa, v.integral);
      return v.pass ? 0 : 1;
    }
    if (*solve) {
      const ScenarioConfig cfg = scenario(cfg_path, preset);
      RunOptions opt;
      opt.out_dir = out_dir;
      opt.override_gate = override_gate;
      opt.paths = paths;
      opt.has_seed = seed_opt->count() > 0;
      opt.seed = seed;
      const RunManifest m = run_scenario(cfg, opt);
      std::printf("config %s\n", m.config_hash.c_str());
      if (m.gate_overridden) std::printf("gate failed, overridden\n");
      for (const auto& f : m.outputs)
        std::printf("wrote %s%s%s\n", f.path.c_str(), f.sha256.empty() ? "" : "  sha256 ", f.sha256.c_str());
      bool ok = true;
      for (const auto& [name, outcome] : m.suites) {
        std::printf("suite %s: %s\n", name.c_str(), outcome.c_str());
        ok = ok && (outcome == "pass" || outcome == "expected-fail");
      }
      std::printf("%.2fs\n", m.wall_seconds);
      return ok ? 0 : code(ExitCode::suite_failure);
    }
    if (*verify) {
      ScenarioConfig cfg = scenario(vcfg, vpreset);
      if (vpaths > 0) cfg.n_paths = vpaths;
      if (vseed_opt->count()) cfg.seed = vseed;
      // the suites the config asks for; positivity alone when it asks for none
      const bool time_dependent = cfg.kind != ScenarioKind::elliptic && cfg.kind != ScenarioKind::covariance;
      std::vector<SuiteReport> reports;
      if (cfg.suite_positivity || (!cfg.suite_refinement && time_dependent)) reports.push_back(positivity_suite(cfg));
      if (cfg.suite_refinement || !time_dependent) reports.push_back(refinement_suite(cfg));
      bool ok = true;
      for (const auto& r : reports) {
        std::printf("%s", r.table().c_str());
        ok = ok && r.as_expected();
      }
      return ok ? 0 : code(ExitCode::suite_failure);
    }
    if (*oracle) {
      if (okind == "getoor") {
        std::printf("%.17g\n", getoor_ball_solution(oalpha, od, std::abs(ox)));
      } else {
        McOptions mc;
        mc.dt = odt;
        mc.master_seed = oseed;
        auto e = duhamel_reference(oalpha, DomainSpec::interval(-1, 1), [](double, const Point&) { return 1.0; }, ot,
                                   point1(ox), opaths, mc);
        std::printf("%.17g +- %.3g (%ld paths)\n", e.mean, e.se, e.paths);
      }
      return 0;
    }
    if (*sweep) {
      auto [t, base] = sw_args.resolve();
      std::vector<Axis> grid;
      for (const auto& a : axes) {
        grid.push_back(parse_axis(a));
        ParameterSet probe;
        if (!set_field(probe, grid.back().name, 0)) throw ConfigError("unknown sweep parameter '" + grid.back().name + "'");
      }
      for (const auto& a : grid) std::printf("%s,", a.name.c_str());
      std::printf("pass,first_failure\n");
      std::vector<int> idx(grid.size(), 0);
      while (true) {
        ParameterSet ps = base;
        for (size_t k = 0; k < grid.size(); ++k) {
          const Axis& a = grid[k];
          const double v = a.n == 1 ? a.lo : a.lo + (a.hi - a.lo) * idx[k] / (a.n - 1);
          set_field(ps, a.name, v);
          std::printf("%s,", format_double(v).c_str());
        }
        const GateVerdict v = validate(t, ps);
        const Clause* bad = v.first_failure();
        std::printf("%d,%s\n", v.pass ? 1 : 0, bad ? bad->id.c_str() : "");
        size_t k = 0;
        while (k < grid.size() && ++idx[k] == grid[k].n) idx[k++] = 0;
        if (k == grid.size()) break;
      }
      return 0;
    }
    if (*suite) {
      AcceptanceOptions opt;
      opt.only = only;
      opt.seed = sseed;
      auto results = run_acceptance(opt, [](const CriterionResult& r) {
        std::printf("%s\n", format_result(r).c_str());
        std::fflush(stdout);
      });
      return acceptance_ok(results) ? 0 : code(ExitCode::suite_failure);
    }
  } catch (const GateRefused& e) {
    std::fprintf(stderr, "gate failed, nothing written\n%s", e.verdict.table().c_str());
    return code(ExitCode::gate_failure);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return code(ExitCode::config_error);
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return code(ExitCode::io_error);
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return code(ExitCode::config_error);
  }
  return 0;
}

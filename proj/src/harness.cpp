#include "nlspde/harness.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <sstream>

#ifndef NLSPDE_VERSION
#define NLSPDE_VERSION "0.0.0"
#endif

namespace nlspde {

namespace fs = std::filesystem;

const char* code_version() { return NLSPDE_VERSION; }

GateRefused::GateRefused(GateVerdict v)
    : std::runtime_error("gate failed at clause " +
                         (v.first_failure() ? v.first_failure()->id : std::string("?"))),
      verdict(std::move(v)) {}

fs::path output_dir() {
  const char* env = std::getenv("SPDE_OUT_DIR");
  return env && *env ? fs::path(env) : fs::path("spde_out");
}

void write_atomic(const fs::path& target, const std::string& bytes) {
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) throw IoError("cannot create " + target.parent_path().string() + ": " + ec.message());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto " + target.string());
  }
}

std::string SuiteReport::outcome() const {
  if (expected_fail) return pass ? "unexpected-pass" : "expected-fail";
  return pass ? "pass" : "fail";
}

std::string SuiteReport::table() const {
  std::string out = name + ": " + outcome() + "\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "  %-34s %-4s value=%.6g threshold=%.6g\n", r.label.c_str(),
                  r.pass ? "ok" : "FAIL", r.value, r.threshold);
    out += line;
  }
  return out;
}

std::string RunManifest::json() const {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["code_version"] = code_version;
  nlohmann::ordered_json g;
  g["pass"] = gate.pass;
  g["overridden"] = gate_overridden;
  for (const auto& c : gate.checks)
    g["clauses"].push_back({{"id", c.id}, {"pass", c.pass}, {"lhs", format_double(c.lhs)},
                            {"relation", relation_symbol(c.rel)}, {"rhs", format_double(c.rhs)},
                            {"note", c.note}});
  j["gate"] = g;
  j["seeds"] = nlohmann::ordered_json::array();
  for (const auto& s : seeds) j["seeds"].push_back({{"master", s.master}, {"path", s.path}});
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& o : outputs) j["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}});
  j["wall_seconds"] = wall_seconds;
  j["suites"] = suites;
  return j.dump(2) + "\n";
}

std::vector<Trajectory> simulate_paths(const ScenarioConfig& cfg, const Problem& prob) {
  std::vector<Trajectory> out;
  out.reserve(cfg.n_paths);
  Stepper stepper(prob);
  for (long k = 0; k < cfg.n_paths; ++k) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(k));
    if (cfg.kind == ScenarioKind::superlinear)
      out.push_back(solve_superlinear_truncated(prob, cfg.superlinear, kInfinity, rng));
    else
      out.push_back(solve_semilinear(prob, stepper, rng));
  }
  return out;
}

CovarianceCheck covariance_check(const CovarianceSpec& spec, const Grid& grid, double dt, long draws,
                                 std::uint64_t seed) {
  NoiseFactor f = covariance_factor(spec, grid);
  RngStream rng(seed, 0);
  Matrix X(grid.size(), draws);
  for (long k = 0; k < draws; ++k) X.col(k) = sample_increment(f, dt, rng);
  Matrix emp = (X * X.transpose()) / static_cast<double>(draws);
  Matrix target = dt * f.C;
  CovarianceCheck c;
  c.rel_frobenius = (emp - target).norm() / target.norm();
  c.nodes = grid.size();
  c.draws = draws;
  c.rank = f.rank;
  return c;
}

namespace {

std::string csv_header(int dim) { return dim == 1 ? "node,x" : "node,x,y"; }

std::string csv_point(const Grid& g, int k) {
  std::string s = std::to_string(k) + "," + format_double(g.nodes(0, k));
  if (g.dim() == 2) s += "," + format_double(g.nodes(1, k));
  return s;
}

Vector final_mean(const std::vector<Trajectory>& paths) {
  Vector m = Vector::Zero(paths.front().fields.rows());
  for (const auto& tr : paths) m += tr.fields.rightCols(1);
  return m / static_cast<double>(paths.size());
}

double global_min(const std::vector<Trajectory>& paths) {
  double m = kInfinity;
  for (const auto& tr : paths) m = std::min(m, tr.fields.minCoeff());
  return m;
}

SolutionNorm path_norm(const ScenarioConfig& cfg, const Problem& prob, const std::vector<Trajectory>& paths) {
  std::vector<PathFields> pf;
  pf.reserve(paths.size());
  for (const auto& tr : paths) pf.push_back(path_fields(prob, tr));
  return solution_space_norm(pf, prob.u0, {cfg.gate.p, cfg.gate.theta, cfg.alpha}, prob.grid);
}

Vector steady_field(const ScenarioConfig& cfg, const Problem& prob) {
  const double c = cfg.presets.drift_c;
  SpaceFn f = [c](const Point&) { return c; };
  if (cfg.presets.drift == "zero") f = [](const Point&) { return 0.0; };
  if (cfg.presets.drift == "minus_one") f = [](const Point&) { return -1.0; };
  require(cfg.presets.drift != "sine_forced", "elliptic scenarios take a constant right-hand side");
  return solve_steady(prob.op, prob.grid, f);
}

bool unit_ball(const DomainSpec& d) {
  if (d.kind == DomainKind::interval) return d.a == -1 && d.b == 1;
  return d.kind == DomainKind::disk && d.center.isZero() && d.r_out == 1;
}

}  // namespace

RunManifest run_scenario(const ScenarioConfig& cfg_in, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg = cfg_in;
  if (opt.paths > 0) cfg.n_paths = opt.paths;
  if (opt.has_seed) cfg.seed = opt.seed;

  RunManifest man;
  man.config_hash = cfg.hash();
  man.code_version = code_version();
  man.gate = evaluate_gate(cfg);
  if (!man.gate.pass && !opt.override_gate) throw GateRefused(man.gate);
  man.gate_overridden = !man.gate.pass;

  Problem prob = build_problem(cfg);
  const Grid& g = prob.grid;
  const fs::path dir = opt.out_dir.empty() ? output_dir() : opt.out_dir;
  std::ostringstream fields, norms;

  if (cfg.kind == ScenarioKind::elliptic) {
    Vector u = steady_field(cfg, prob);
    fields << csv_header(g.dim()) << ",u\n";
    for (int k = 0; k < g.size(); ++k) fields << csv_point(g, k) << ',' << format_double(u[k]) << '\n';
    norms << "path,quantity,value\n";
    norms << "all,lp," << format_double(weighted_lp_norm(u, cfg.gate.p, cfg.gate.theta, g)) << '\n';
    norms << "all,sobolev1," << format_double(weighted_sobolev_norm(u, 1, cfg.gate.p, cfg.gate.theta, g)) << '\n';
    double decay = std::numeric_limits<double>::quiet_NaN();
    try {
      decay = boundary_decay_exponent(u, g).exponent;
    } catch (const PreconditionError&) {
    }
    norms << "all,decay_exponent," << format_double(decay) << '\n';
  } else if (cfg.kind == ScenarioKind::covariance) {
    auto c = covariance_check(cfg.noise, g, cfg.dt, cfg.n_paths, cfg.seed);
    man.seeds.push_back({cfg.seed, 0});
    NoiseFactor f = covariance_factor(cfg.noise, g);
    fields << csv_header(g.dim()) << ",variance\n";
    for (int k = 0; k < g.size(); ++k) fields << csv_point(g, k) << ',' << format_double(cfg.dt * f.C(k, k)) << '\n';
    norms << "path,quantity,value\n";
    norms << "all,rel_frobenius," << format_double(c.rel_frobenius) << '\n';
    norms << "all,rank," << c.rank << '\n';
    norms << "all,draws," << c.draws << '\n';
  } else {
    auto paths = simulate_paths(cfg, prob);
    for (const auto& tr : paths) man.seeds.push_back({tr.master_seed, tr.path_id});
    Vector mean = final_mean(paths);
    fields << csv_header(g.dim()) << ",u0,mean_T\n";
    for (int k = 0; k < g.size(); ++k)
      fields << csv_point(g, k) << ',' << format_double(prob.u0[k]) << ',' << format_double(mean[k]) << '\n';
    norms << "path,quantity,value\n";
    for (size_t k = 0; k < paths.size(); ++k) {
      Vector uT = paths[k].fields.rightCols(1);
      const std::string p = std::to_string(k) + ",";
      norms << p << "lp_T," << format_double(weighted_lp_norm(uT, cfg.gate.p, cfg.gate.theta, g)) << '\n';
      norms << p << "sobolev1_T," << format_double(weighted_sobolev_norm(uT, 1, cfg.gate.p, cfg.gate.theta, g)) << '\n';
      norms << p << "min_u," << format_double(paths[k].fields.minCoeff()) << '\n';
      norms << p << "max_u," << format_double(paths[k].fields.maxCoeff()) << '\n';
    }
    auto sn = path_norm(cfg, prob, paths);
    norms << "all,solution_norm," << format_double(sn.total()) << '\n';
    norms << "all,data_norm," << format_double(sn.data()) << '\n';
  }

  const fs::path fpath = dir / (cfg.name + "_fields.csv"), npath = dir / (cfg.name + "_norms.csv");
  write_atomic(fpath, fields.str());
  write_atomic(npath, norms.str());
  man.outputs.push_back({fpath.string(), sha256_hex(fields.str())});
  man.outputs.push_back({npath.string(), sha256_hex(norms.str())});

  if (cfg.suite_positivity) man.suites["positivity"] = positivity_suite(cfg).outcome();
  if (cfg.suite_refinement) man.suites["refinement"] = refinement_suite(cfg).outcome();

  const fs::path mpath = dir / (cfg.name + "_manifest.json");
  man.outputs.push_back({mpath.string(), ""});  // the manifest does not hash itself
  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_atomic(mpath, man.json());
  return man;
}

SuiteReport positivity_suite(const ScenarioConfig& cfg) {
  SuiteReport r;
  r.name = "positivity[" + cfg.name + "]";
  r.expected_fail = cfg.expected_fail;
  Problem prob = build_problem(cfg);
  const double m = global_min(simulate_paths(cfg, prob));
  r.rows.push_back({"min over paths, times, nodes", m, kPositivityFloor, m >= kPositivityFloor});
  r.pass = r.rows.back().pass;
  return r;
}

RefinementNumbers refinement_numbers(const ScenarioConfig& cfg) {
  RefinementNumbers out;
  for (int level = 0; level < 2; ++level) {
    const double h = level == 0 ? cfg.h : 0.5 * cfg.h;
    Problem prob = build_problem(cfg, h);
    auto paths = simulate_paths(cfg, prob);
    auto sn = path_norm(cfg, prob, paths);
    const double ratio = sn.total() / sn.data();
    const double decay = boundary_decay_exponent(final_mean(paths), prob.grid).exponent;
    (level == 0 ? out.ratio_h : out.ratio_h2) = ratio;
    (level == 0 ? out.decay_h : out.decay_h2) = decay;
  }
  return out;
}

SuiteReport refinement_suite(const ScenarioConfig& cfg) {
  SuiteReport r;
  r.name = "refinement[" + cfg.name + "]";
  r.expected_fail = cfg.expected_fail;
  if (cfg.kind == ScenarioKind::elliptic) {
    double e[2];
    for (int level = 0; level < 2; ++level) {
      const double h = level == 0 ? cfg.h : 0.5 * cfg.h;
      Problem prob = build_problem(cfg, h);
      Vector u = steady_field(cfg, prob);
      e[level] = boundary_decay_exponent(u, prob.grid).exponent;
      if (unit_ball(cfg.domain) && cfg.presets.drift == "constant") {
        double err = 0, peak = 0;
        for (int k = 0; k < prob.grid.size(); ++k) {
          const double ex = cfg.presets.drift_c * getoor_ball_solution(cfg.alpha, prob.grid.dim(), prob.grid.node(k).norm());
          err = std::max(err, std::abs(u[k] - ex));
          peak = std::max(peak, std::abs(ex));
        }
        r.rows.push_back({"ball solution rel Linf error, h/" + std::to_string(1 << level), err / peak, 0.02,
                          err / peak <= 0.02});
      }
      r.rows.push_back({"|decay - alpha/2|, h/" + std::to_string(1 << level), std::abs(e[level] - 0.5 * cfg.alpha),
                        0.05, std::abs(e[level] - 0.5 * cfg.alpha) <= 0.05});
    }
    r.rows.push_back({"|decay(h) - decay(h/2)|", std::abs(e[0] - e[1]), 0.05, std::abs(e[0] - e[1]) <= 0.05});
  } else if (cfg.kind == ScenarioKind::covariance) {
    Problem prob = build_problem(cfg);
    auto c = covariance_check(cfg.noise, prob.grid, cfg.dt, cfg.n_paths, cfg.seed);
    r.rows.push_back({"empirical covariance rel Frobenius", c.rel_frobenius, 0.05, c.rel_frobenius <= 0.05});
  } else {
    auto n = refinement_numbers(cfg);
    const double change = std::max(n.ratio_h / n.ratio_h2, n.ratio_h2 / n.ratio_h);
    r.rows.push_back({"norm ratio change h vs h/2", change, 2.0, change <= 2.0});
    const double dd = std::abs(n.decay_h - n.decay_h2);
    r.rows.push_back({"|decay(h) - decay(h/2)|", dd, 0.05, dd <= 0.05});
  }
  r.pass = true;
  for (const auto& row : r.rows) r.pass = r.pass && row.pass;
  return r;
}

}  // namespace nlspde

#include "nlspde/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace nlspde {

namespace pt = boost::property_tree;

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::elliptic: return "elliptic";
    case ScenarioKind::parabolic: return "parabolic";
    case ScenarioKind::stochastic: return "stochastic";
    case ScenarioKind::superlinear: return "superlinear";
    case ScenarioKind::covariance: return "covariance";
  }
  return "?";
}

std::string theorem_name(Theorem t) {
  switch (t) {
    case Theorem::semilinear: return "semilinear";
    case Theorem::colored: return "colored";
    case Theorem::superlinear: return "superlinear";
  }
  return "?";
}

namespace {

const char* domain_name(DomainKind k) {
  return k == DomainKind::interval ? "interval" : k == DomainKind::disk ? "disk" : "annulus";
}

const char* kernel_name(CovarianceKind k) {
  switch (k) {
    case CovarianceKind::white: return "white";
    case CovarianceKind::riesz: return "riesz";
    case CovarianceKind::ou: return "ou";
    case CovarianceKind::flat: return "flat";
  }
  return "?";
}

const std::set<std::string> kDrifts{"zero", "constant", "sine_forced", "minus_one"};
const std::set<std::string> kAmplitudes{"none", "positive_part", "constant", "bounded"};
const std::set<std::string> kInitials{"zero", "bump", "ball"};
const std::set<std::string> kMeasures{"isotropic", "axes"};

// Every key the parser accepts, by section.
const std::map<std::string, std::set<std::string>> kKeys{
    {"scenario", {"name", "kind"}},
    {"domain", {"kind", "a", "b", "cx", "cy", "r", "r_in", "r_out"}},
    {"grid", {"h"}},
    {"operator", {"alpha", "measure"}},
    {"noise", {"kernel", "beta", "scale"}},
    {"model", {"drift", "drift_c", "amplitude", "sigma", "initial", "xi", "lambda", "levels"}},
    {"gate", {"theorem", "p", "theta", "gamma", "lambda", "s", "theta0"}},
    {"run", {"T", "dt", "paths", "seed", "scheme"}},
    {"suite", {"positivity", "refinement", "expected_fail"}}};

double to_double(const std::string& s, const std::string& key) {
  double v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw ConfigError("config: " + key + " is not a number: '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError("config: " + key + " is not an unsigned 64-bit integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config: " + key + " is not a boolean: '" + s + "'");
}

std::string choose(const std::string& s, const std::set<std::string>& allowed, const std::string& key) {
  if (!allowed.count(s)) throw ConfigError("config: unknown preset '" + s + "' for " + key);
  return s;
}

std::vector<double> to_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto a = item.find_first_not_of(' '), b = item.find_last_not_of(' ');
    if (a == std::string::npos) continue;
    out.push_back(to_double(item.substr(a, b - a + 1), key));
  }
  return out;
}

Vector initial_field(const std::string& name, const Grid& grid, double alpha) {
  Vector u = Vector::Zero(grid.size());
  if (name == "bump") {
    const double r = grid.domain.inradius();
    for (int k = 0; k < grid.size(); ++k) {
      double s = std::sin(0.5 * std::numbers::pi * std::min(1.0, grid.dist[k] / r));
      u[k] = s * s;
    }
  } else if (name == "ball") {
    for (int k = 0; k < grid.size(); ++k) {
      Point x = grid.node(k);
      if (grid.dim() == 2) x -= grid.domain.center;
      else x[0] -= 0.5 * (grid.domain.a + grid.domain.b);
      const double R = grid.dim() == 1 ? 0.5 * (grid.domain.b - grid.domain.a) : grid.domain.r_out;
      u[k] = std::pow(R, alpha) * getoor_ball_solution(alpha, grid.dim(), x.norm() / R);
    }
  }
  return u;
}

}  // namespace

std::string ScenarioConfig::canonical() const {
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << '=' << v << '\n'; };
  auto num = [&](const char* k, double v) { kv(k, format_double(v)); };
  kv("scenario.name", name);
  kv("scenario.kind", kind_name(kind));
  kv("domain.kind", domain_name(domain.kind));
  num("domain.a", domain.a);
  num("domain.b", domain.b);
  num("domain.cx", domain.center.x());
  num("domain.cy", domain.center.y());
  num("domain.r_in", domain.r_in);
  num("domain.r_out", domain.r_out);
  num("grid.h", h);
  num("operator.alpha", alpha);
  kv("operator.measure", presets.measure);
  kv("noise.kernel", has_noise ? kernel_name(noise.kind) : "none");
  num("noise.beta", noise.beta);
  num("noise.scale", noise.scale);
  kv("model.drift", presets.drift);
  num("model.drift_c", presets.drift_c);
  kv("model.amplitude", presets.amplitude);
  num("model.sigma", presets.sigma);
  kv("model.initial", presets.initial);
  num("model.xi", superlinear.xi);
  num("model.lambda", superlinear.lambda);
  std::string lv;
  for (double m : levels) lv += (lv.empty() ? "" : ",") + format_double(m);
  kv("model.levels", lv);
  kv("gate.theorem", theorem_name(theorem));
  num("gate.p", gate.p);
  num("gate.theta", gate.theta);
  num("gate.gamma", gate.gamma);
  num("gate.lambda", gate.lambda);
  num("gate.s", gate.s);
  num("gate.theta0", gate.theta0);
  num("run.T", T);
  num("run.dt", dt);
  kv("run.paths", std::to_string(n_paths));
  kv("run.seed", std::to_string(seed));
  kv("run.scheme", scheme == NoiseScheme::balanced ? "balanced" : "explicit");
  kv("suite.positivity", suite_positivity ? "true" : "false");
  kv("suite.refinement", suite_refinement ? "true" : "false");
  kv("suite.expected_fail", expected_fail ? "true" : "false");
  return o.str();
}

std::string ScenarioConfig::hash() const { return sha256_hex(canonical()); }

ScenarioConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [sec, body] : tree) {
    auto it = kKeys.find(sec);
    if (it == kKeys.end()) throw ConfigError("config: unknown section [" + sec + "]");
    for (const auto& [key, _] : body)
      if (!it->second.count(key)) throw ConfigError("config: unknown key " + sec + "." + key);
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    auto v = tree.get_optional<std::string>(path);
    if (!v) return std::nullopt;
    return *v;
  };
  auto num = [&](const std::string& path, double def) {
    auto v = get(path);
    return v ? to_double(*v, path) : def;
  };

  ScenarioConfig c;
  if (auto v = get("scenario.name")) c.name = *v;
  if (auto v = get("scenario.kind")) {
    static const std::map<std::string, ScenarioKind> m{{"elliptic", ScenarioKind::elliptic},
                                                       {"parabolic", ScenarioKind::parabolic},
                                                       {"stochastic", ScenarioKind::stochastic},
                                                       {"superlinear", ScenarioKind::superlinear},
                                                       {"covariance", ScenarioKind::covariance}};
    if (!m.count(*v)) throw ConfigError("config: unknown scenario kind '" + *v + "'");
    c.kind = m.at(*v);
  }

  const std::string dk = get("domain.kind").value_or("interval");
  try {
    if (dk == "interval") {
      c.domain = DomainSpec::interval(num("domain.a", -1), num("domain.b", 1));
    } else if (dk == "disk") {
      c.domain = DomainSpec::disk({num("domain.cx", 0), num("domain.cy", 0)}, num("domain.r", 1));
    } else if (dk == "annulus") {
      c.domain = DomainSpec::annulus({num("domain.cx", 0), num("domain.cy", 0)}, num("domain.r_in", 0.5),
                                     num("domain.r_out", 1));
    } else {
      throw ConfigError("config: unknown domain kind '" + dk + "'");
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  c.h = num("grid.h", c.h);
  c.alpha = num("operator.alpha", c.alpha);
  c.presets.measure = choose(get("operator.measure").value_or("isotropic"), kMeasures, "operator.measure");

  const std::string kern = get("noise.kernel").value_or("none");
  const double beta = num("noise.beta", 0.0), scale = num("noise.scale", 1.0);
  c.has_noise = kern != "none";
  if (kern == "none" || kern == "white") c.noise = CovarianceSpec::white(scale);
  else if (kern == "riesz") c.noise = CovarianceSpec::riesz(beta, scale);
  else if (kern == "ou") c.noise = CovarianceSpec::ou(beta, scale);
  else if (kern == "flat") c.noise = CovarianceSpec::flat(scale);
  else throw ConfigError("config: unknown noise kernel '" + kern + "'");

  c.presets.drift = choose(get("model.drift").value_or("zero"), kDrifts, "model.drift");
  c.presets.drift_c = num("model.drift_c", 1.0);
  c.presets.amplitude = choose(get("model.amplitude").value_or("none"), kAmplitudes, "model.amplitude");
  c.presets.sigma = num("model.sigma", 1.0);
  c.presets.initial = choose(get("model.initial").value_or("bump"), kInitials, "model.initial");
  c.superlinear.xi = num("model.xi", 1.0);
  c.superlinear.lambda = num("model.lambda", 0.0);
  if (auto v = get("model.levels")) c.levels = to_list(*v, "model.levels");

  const std::string th = get("gate.theorem").value_or("semilinear");
  if (th == "semilinear") c.theorem = Theorem::semilinear;
  else if (th == "colored") c.theorem = Theorem::colored;
  else if (th == "superlinear") c.theorem = Theorem::superlinear;
  else throw ConfigError("config: unknown theorem '" + th + "'");
  c.gate.p = num("gate.p", 2.0);
  c.gate.theta = num("gate.theta", c.domain.dim());
  c.gate.gamma = num("gate.gamma", 0.0);
  c.gate.lambda = num("gate.lambda", c.superlinear.lambda);
  c.gate.s = num("gate.s", kInfinity);
  c.gate.theta0 = num("gate.theta0", 0.0);

  c.T = num("run.T", c.T);
  c.dt = num("run.dt", c.dt);
  if (auto v = get("run.paths")) c.n_paths = static_cast<long>(to_u64(*v, "run.paths"));
  auto seed = get("run.seed");
  if (!seed) throw ConfigError("config: run.seed is required");
  c.seed = to_u64(*seed, "run.seed");
  const std::string sch = get("run.scheme").value_or("explicit");
  if (sch == "explicit") c.scheme = NoiseScheme::explicit_increment;
  else if (sch == "balanced") c.scheme = NoiseScheme::balanced;
  else throw ConfigError("config: unknown scheme '" + sch + "'");

  if (auto v = get("suite.positivity")) c.suite_positivity = to_bool(*v, "suite.positivity");
  if (auto v = get("suite.refinement")) c.suite_refinement = to_bool(*v, "suite.refinement");
  if (auto v = get("suite.expected_fail")) c.expected_fail = to_bool(*v, "suite.expected_fail");

  if (!(c.h > 0)) throw ConfigError("config: grid.h must be positive");
  if (!(c.T > 0 && c.dt > 0)) throw ConfigError("config: run.T and run.dt must be positive");
  if (c.n_paths < 1) throw ConfigError("config: run.paths must be at least 1");
  if (c.presets.measure == "axes" && c.domain.dim() == 1)
    throw ConfigError("config: the axes measure needs a planar domain");
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> preset_names() {
  return {"minimal_linear", "elliptic_ball", "parabolic", "linear_stochastic", "semilinear",
          "max_principle", "max_principle_control", "superlinear_positive", "cascade", "covariance"};
}

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  c.domain = DomainSpec::interval(-1, 1);
  c.seed = 20240601;
  c.gate.d = 1;
  c.gate.p = 2;
  c.gate.theta = 1;
  c.gate.gamma = 0.1;
  if (name == "minimal_linear") {
    c.kind = ScenarioKind::parabolic;
    c.h = 2.0 / 32;
    c.presets.drift = "constant";
    c.presets.initial = "zero";
    c.T = 0.5;
    c.dt = 0.05;
  } else if (name == "elliptic_ball") {
    c.kind = ScenarioKind::elliptic;
    c.h = 2.0 / 512;
    c.presets.drift = "constant";
    c.presets.initial = "zero";
    c.gate.gamma = 0.5;
    c.suite_refinement = true;
  } else if (name == "parabolic") {
    c.kind = ScenarioKind::parabolic;
    c.h = 2.0 / 256;
    c.presets.drift = "constant";
    c.presets.initial = "zero";
    c.T = 1.0;
    c.dt = 1e-3;
  } else if (name == "linear_stochastic" || name == "semilinear") {
    c.kind = ScenarioKind::stochastic;
    c.h = 2.0 / 64;
    c.alpha = 1.2;
    c.has_noise = true;
    c.noise = CovarianceSpec::ou(1.0);
    c.theorem = Theorem::colored;
    c.presets.drift = name == "semilinear" ? "sine_forced" : "constant";
    c.presets.amplitude = name == "semilinear" ? "positive_part" : "constant";
    c.presets.sigma = 0.5;
    c.T = 1.0;
    c.dt = 0.01;
    c.n_paths = 50;
    c.scheme = name == "semilinear" ? NoiseScheme::balanced : NoiseScheme::explicit_increment;
    c.suite_refinement = true;
  } else if (name == "max_principle" || name == "max_principle_control") {
    c.kind = ScenarioKind::stochastic;
    c.h = 2.0 / 64;
    c.alpha = 1.2;
    c.has_noise = true;
    c.noise = CovarianceSpec::ou(1.0);
    c.theorem = Theorem::colored;
    c.presets.amplitude = "positive_part";
    c.presets.sigma = 1.0;
    c.presets.drift = name == "max_principle" ? "zero" : "minus_one";
    c.T = 1.0;
    c.dt = 0.01;
    c.n_paths = 200;
    c.scheme = NoiseScheme::balanced;
    c.suite_positivity = true;
    c.expected_fail = name == "max_principle_control";
  } else if (name == "superlinear_positive" || name == "cascade") {
    c.kind = ScenarioKind::superlinear;
    c.h = 2.0 / 64;
    c.alpha = 1.2;
    c.has_noise = true;
    c.noise = CovarianceSpec::ou(1.0);
    c.theorem = Theorem::superlinear;
    c.superlinear = {1.0, 0.05};
    c.gate.lambda = 0.05;
    c.gate.p = 4;
    c.T = 1.0;
    c.dt = 0.01;
    c.n_paths = 200;
    c.scheme = NoiseScheme::balanced;
    c.suite_positivity = name == "superlinear_positive";
    if (name == "cascade") {
      c.levels = {1, 2, 4, 8};
      c.superlinear.xi = 2.0;
    }
  } else if (name == "covariance") {
    c.kind = ScenarioKind::covariance;
    c.h = 2.0 / 64;
    c.has_noise = true;
    c.noise = CovarianceSpec::riesz(0.3);
    c.theorem = Theorem::colored;
    c.dt = 0.01;
    c.n_paths = 10000;
    c.suite_refinement = true;
  } else {
    throw ConfigError("config: unknown preset '" + name + "'");
  }
  return c;
}

StableOperatorSpec build_operator(const ScenarioConfig& cfg) {
  StableOperatorSpec op;
  op.alpha = cfg.alpha;
  const int d = cfg.domain.dim();
  op.spherical = cfg.presets.measure == "axes" ? SphericalMeasure::axis_atoms(d, 1.0)
                                               : SphericalMeasure::isotropic(d, cfg.alpha);
  return op;
}

Problem build_problem(const ScenarioConfig& cfg) { return build_problem(cfg, cfg.h); }

Problem build_problem(const ScenarioConfig& cfg, double h) {
  Problem p;
  p.op = build_operator(cfg);
  try {
    p.grid = make_grid(cfg.domain, h);
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  p.u0 = initial_field(cfg.presets.initial, p.grid, cfg.alpha);
  p.T = cfg.T;
  p.dt = cfg.dt;
  p.scheme = cfg.scheme;
  const double c = cfg.presets.drift_c, s = cfg.presets.sigma;
  const auto& dn = cfg.presets.drift;
  if (dn == "constant") {
    p.drift = [c](double, const Point&, double) { return c; };
  } else if (dn == "sine_forced") {
    p.drift = [c](double, const Point&, double u) { return c * (1 + 0.5 * std::sin(u)); };
    p.lipschitz_f = 0.5 * std::abs(c);
  } else if (dn == "minus_one") {
    p.drift = [](double, const Point&, double) { return -1.0; };
  }
  if (cfg.has_noise) p.noise = covariance_factor(cfg.noise, p.grid);
  const auto& an = cfg.presets.amplitude;
  if (cfg.kind == ScenarioKind::superlinear) {
    p.amplitude = truncated_amplitude(cfg.superlinear, kInfinity);
  } else if (an == "positive_part") {
    p.amplitude = [s](double, const Point&, double u) { return s * std::max(u, 0.0); };
    p.lipschitz_h = std::abs(s);
  } else if (an == "constant") {
    p.amplitude = [s](double, const Point&, double) { return s; };
  } else if (an == "bounded") {
    p.amplitude = [s](double, const Point&, double u) { return s * (0.5 + 0.5 * std::sin(u)); };
    p.lipschitz_h = 0.5 * std::abs(s);
  }
  return p;
}

GateVerdict evaluate_gate(const ScenarioConfig& cfg) {
  ParameterSet ps = cfg.gate;
  ps.d = cfg.domain.dim();
  ps.alpha = cfg.alpha;
  ps.domain_convex = cfg.domain.convex();
  ps.isotropic = cfg.presets.measure == "isotropic";
  ps.kernel = cfg.noise;
  if (cfg.theorem == Theorem::superlinear) ps.lambda = cfg.superlinear.lambda;
  switch (cfg.theorem) {
    case Theorem::semilinear: return validate_semilinear(ps);
    case Theorem::colored: return validate_colored(ps);
    case Theorem::superlinear: return validate_superlinear(ps);
  }
  return {};
}

}  // namespace nlspde

#include "nlspde/gate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace nlspde {

double ParameterSet::theta_bar() const {
  const double ds = std::isinf(s) ? 0.0 : d / (2 * s);
  return std::max(-0.5 * alpha + gamma + ds, -0.5 * d);
}

bool Clause::holds() const {
  switch (rel) {
    case Relation::lt: return lhs < rhs;
    case Relation::le: return lhs <= rhs;
    case Relation::gt: return lhs > rhs;
    case Relation::ge: return lhs >= rhs;
  }
  return false;
}

std::string relation_symbol(Relation r) {
  switch (r) {
    case Relation::lt: return "<";
    case Relation::le: return "<=";
    case Relation::gt: return ">";
    case Relation::ge: return ">=";
  }
  return "?";
}

const Clause* GateVerdict::first_failure() const {
  for (const auto& c : checks)
    if (!c.pass) return &c;
  return nullptr;
}

const Clause* GateVerdict::find(const std::string& id) const {
  for (const auto& c : checks)
    if (c.id == id) return &c;
  return nullptr;
}

std::string GateVerdict::table() const {
  std::string out;
  char line[256];
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%-22s %-4s %.17g %s %.17g%s%s\n", c.id.c_str(),
                  c.pass ? "ok" : "FAIL", c.lhs, relation_symbol(c.rel).c_str(), c.rhs,
                  c.note.empty() ? "" : "  # ", c.note.c_str());
    out += line;
  }
  out += pass ? "verdict: pass\n" : "verdict: fail\n";
  return out;
}

namespace {

constexpr double inf = kInfinity;

struct Builder {
  GateVerdict v;
  void add(std::string id, double lhs, Relation rel, double rhs, std::string note = {}) {
    Clause c{std::move(id), false, lhs, rhs, rel, std::move(note)};
    c.pass = c.holds();
    v.pass = v.pass && c.pass;
    v.checks.push_back(std::move(c));
  }
};

void alpha_range(Builder& b, const ParameterSet& ps) {
  b.add("alpha_min", ps.alpha, Relation::gt, 0.0);
  b.add("alpha_max", ps.alpha, Relation::lt, 2.0);
}

// theta in (d-1, d-1+p) on convex domains, (d-alpha/2, d-alpha/2+alpha p/2) otherwise
void theta_window(Builder& b, const ParameterSet& ps) {
  if (ps.domain_convex) {
    b.add("theta_lower", ps.theta, Relation::gt, ps.d - 1.0, "convex");
    b.add("theta_upper", ps.theta, Relation::lt, ps.d - 1.0 + ps.p, "convex");
  } else {
    b.add("theta_lower", ps.theta, Relation::gt, ps.d - 0.5 * ps.alpha, "general open set");
    b.add("theta_upper", ps.theta, Relation::lt, ps.d - 0.5 * ps.alpha + 0.5 * ps.alpha * ps.p,
          "general open set");
  }
}

void gamma_open(Builder& b, const ParameterSet& ps) {
  b.add("gamma_min", ps.gamma, Relation::gt, 0.0);
  b.add("gamma_max", ps.gamma, Relation::lt, 0.5 * ps.alpha);
}

// Integral estimate < inf. Out-of-range inputs record an infinite estimate.
void dalang(Builder& b, const ParameterSet& ps, double s, const std::string& id) {
  double integral = inf;
  std::string note;
  bool ok_inputs = ps.gamma > 0 && ps.gamma < 0.5 * ps.alpha && s > 1 && ps.alpha > 0 && ps.alpha < 2;
  if (ok_inputs) {
    try {
      auto v = dalang_check(ps.kernel, s, ps.gamma, ps.alpha, ps.d);
      integral = v.integral;
      note = ps.kernel.name() + ", " + branch_name(v.branch) + " branch, kappa=" + std::to_string(v.kappa);
    } catch (const PreconditionError& e) {
      note = e.what();
    }
  } else {
    note = "inputs outside the admissible range";
  }
  b.add(id, integral, Relation::lt, inf, note);
}

}  // namespace

GateVerdict validate_semilinear(const ParameterSet& ps) {
  Builder b;
  alpha_range(b, ps);
  b.add("p_min", ps.p, Relation::ge, 2.0);
  if (ps.isotropic) {
    b.add("gamma_min", ps.gamma, Relation::ge, -inf, "isotropic: any gamma");
    b.add("gamma_max", ps.gamma, Relation::le, inf, "isotropic: any gamma");
  } else {
    b.add("gamma_min", ps.gamma, Relation::ge, 0.0);
    b.add("gamma_max", ps.gamma, Relation::le, ps.alpha);
  }
  theta_window(b, ps);
  return b.v;
}

GateVerdict validate_colored(const ParameterSet& ps) {
  Builder b;
  alpha_range(b, ps);
  gamma_open(b, ps);
  b.add("s_min", ps.s, Relation::gt, 1.0);
  theta_window(b, ps);
  // 2s/(s-1) -> 2 as s -> inf
  const double pmin = std::isinf(ps.s) ? 2.0 : 2 * ps.s / (ps.s - 1);
  b.add("p_min", ps.p, Relation::ge, pmin);
  const double t0 = std::isinf(ps.s) ? inf : std::max(2 * ps.s * ps.gamma + ps.d, ps.s * (ps.alpha - ps.d));
  b.add("theta0_bound", ps.theta0, Relation::lt, t0);
  dalang(b, ps, ps.s, "dalang");
  return b.v;
}

GateVerdict validate_superlinear(const ParameterSet& ps) {
  Builder b;
  alpha_range(b, ps);
  gamma_open(b, ps);
  b.add("lambda_min", ps.lambda, Relation::ge, 0.0);
  b.add("lambda_max", ps.lambda, Relation::lt, 0.5);
  theta_window(b, ps);

  const double d = ps.d, a = ps.alpha, g = ps.gamma, p = ps.p, l = ps.lambda;
  const double pg = g > 0 ? (d + a) / g : inf;
  const double pl = l < 0.5 ? 2 / (1 - 2 * l) : inf;
  b.add("p_super", p, Relation::gt, std::min(pg, pl));

  // the lambda-divided bracket is +inf at lambda = 0, so the bound drops out
  double tl = inf;
  if (l > 0) tl = d + p - 1 - 0.5 * a * p + std::max(g * p / l, (a - d) * p / (2 * l) - d * p);
  b.add("theta_lambda_bound", ps.theta, Relation::lt, tl, l > 0 ? "" : "lambda = 0");
  b.add("theta_gamma_bound", ps.theta, Relation::lt, d + 0.5 * a * p - g * p);

  // same integrability condition with 2 lambda = 1/s
  const double s = l > 0 ? 1 / (2 * l) : inf;
  dalang(b, ps, s, "dalang");
  return b.v;
}

}  // namespace nlspde

#pragma once

#include <string>
#include <vector>

#include "nlspde/noise.hpp"

namespace nlspde {

struct ParameterSet {
  int d = 1;
  double alpha = 1.0;
  double p = 2.0;
  double theta = 1.0;
  double gamma = 0.0;
  double lambda = 0.0;      // super-linear exponent only
  double s = kInfinity;     // in (1, inf]
  double theta0 = 0.0;
  bool domain_convex = true;
  bool isotropic = false;   // L = -(-Laplace)^{alpha/2}; lifts the gamma range for the semilinear gate
  CovarianceSpec kernel = CovarianceSpec::white();

  // (-alpha/2 + gamma + d/2s) v (-d/2)
  double theta_bar() const;
};

enum class Relation { lt, le, gt, ge };

struct Clause {
  std::string id;
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  Relation rel = Relation::lt;
  std::string note;

  // Re-evaluates lhs rel rhs with exact floating comparison.
  bool holds() const;
};

std::string relation_symbol(Relation r);

struct GateVerdict {
  bool pass = true;
  std::vector<Clause> checks;

  const Clause* first_failure() const;
  const Clause* find(const std::string& id) const;
  std::string table() const;
};

GateVerdict validate_semilinear(const ParameterSet& ps);
GateVerdict validate_colored(const ParameterSet& ps);
GateVerdict validate_superlinear(const ParameterSet& ps);

}  // namespace nlspde

#pragma once

#include <vector>

#include "nlspde/geometry.hpp"
#include "nlspde/solver.hpp"

namespace nlspde {

struct NormSpec {
  double p = 2.0;
  double theta = 1.0;
  int order = 0;              // 0 or 1
  double weight_shift = 0.0;  // the field is multiplied by psi^weight_shift first
};

// (sum |u|^p d^{theta-d} h^d)^{1/p} over interior nodes
double weighted_lp_norm(const Vector& u, double p, double theta, const Grid& grid);

// Per-axis first differences: centered inside, one-sided where a neighbour is exterior.
// Result is dim x n.
Matrix grid_gradient(const Vector& u, const Grid& grid);

// Orders m <= n with the factor d^m on D^m u.
double weighted_sobolev_norm(const Vector& u, int n, double p, double theta, const Grid& grid);

double field_norm(const Vector& u, const NormSpec& spec, const Grid& grid);

// Order-0 layer sum  sum_n e^{n theta} ||zeta_{-n}(e^n .) u(e^n .)||_p^p, returned to the power 1/p.
double dyadic_layer_norm(const Vector& u, double p, double theta, const Grid& grid);

// One path of du = Du dt + Su dW. Columns are times; su holds the pointwise l2 size of Su.
struct PathFields {
  std::vector<double> times;
  Matrix u, du, su;
};

struct SolutionNormParams {
  double p = 2.0, theta = 1.0, alpha = 1.0;
};

struct SolutionNorm {
  double u = 0.0;   // || psi^{-alpha/2} u ||
  double u0 = 0.0;  // || psi^{-alpha/2 + alpha/p} u0 ||
  double f = 0.0;   // || psi^{alpha/2} Du ||
  double g = 0.0;   // || Su ||
  double total() const { return u + u0 + f + g; }
  double data() const { return u0 + f + g; }
};

// Order-0 pieces; time integrals by the trapezoid rule, expectations by the path mean.
SolutionNorm solution_space_norm(const std::vector<PathFields>& paths, const Vector& u0,
                                 const SolutionNormParams& params, const Grid& grid);

// Evaluates f(t, x, u) and |h(u)| times the pointwise noise intensity along a trajectory.
PathFields path_fields(const Problem& prob, const Trajectory& traj);

struct DecayFit {
  double exponent = 0.0;
  double intercept = 0.0;
  int nodes = 0;
};

// Slope of log u against log d over nodes with 2h < d < 0.1 diam.
DecayFit boundary_decay_exponent(const Vector& u, const Grid& grid);

struct HolderFit {
  double exponent = 0.0;
  std::vector<double> lags;        // in time units
  std::vector<double> increments;  // E || u(t+lag) - u(t) ||
  bool degenerate = false;
};

// Log-log slope of the mean increment over dyadic lags. Needs 64 steps or more.
HolderFit time_holder_exponent(const std::vector<Trajectory>& paths, const NormSpec& spec,
                               const Grid& grid);

}  // namespace nlspde

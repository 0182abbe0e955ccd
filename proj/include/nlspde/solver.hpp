#pragma once

#include <Eigen/Cholesky>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "nlspde/noise.hpp"
#include "nlspde/operator.hpp"

namespace nlspde {

// f(t, x, u) and friends. Empty means identically zero.
using FieldFn = std::function<double(double t, const Point& x, double u)>;
using SpaceFn = std::function<double(const Point& x)>;
using SpaceTimeFn = std::function<double(double t, const Point& x)>;

enum class NoiseScheme {
  explicit_increment,  // rhs gets h(u^n) dW
  balanced             // adds c (u^n - u^{n+1}) with c = |h dW| / u^n, keeping rhs >= 0
};

struct Problem {
  StableOperatorSpec op;
  Grid grid;
  FieldFn drift;                    // f
  FieldFn amplitude;                // h, multiplies the colored increment F dW
  std::optional<NoiseFactor> noise; // colored noise
  std::vector<FieldFn> sequence;    // g^k, each against its own scalar Wiener process
  Vector u0;
  double T = 1.0;
  double dt = 0.01;
  double lipschitz_f = 0.0, lipschitz_h = 0.0;
  NoiseScheme scheme = NoiseScheme::explicit_increment;

  int steps() const;
  // Normals consumed per step.
  int draws_per_step() const;
};

struct Trajectory {
  std::vector<double> times;
  Matrix fields;  // interior values, one column per time
  std::uint64_t master_seed = 0, path_id = 0;
  std::optional<double> stopping_time;
  bool blown_up = false;
};

// Implicit operator with factorizations of (I - dt m A) cached per modulation value.
class Stepper {
 public:
  Stepper(const Problem& prob);
  const OperatorMatrix& matrix() const { return A_; }
  // (I - dt m(t) A)^{-1} rhs
  Vector solve(double t, const Vector& rhs);
  // (I + diag(c) - dt m(t) A)^{-1} rhs, factorized on every call
  Vector solve_shifted(double t, const Vector& rhs, const Vector& c);

 private:
  double dt_;
  OperatorMatrix A_;
  std::map<double, Eigen::LLT<Matrix>> cache_;
};

Trajectory solve_semilinear(const Problem& prob, RngStream& rng);
Trajectory solve_semilinear(const Problem& prob, Stepper& stepper, RngStream& rng);

// u = (-A)^{-1} f at the nodes.
Vector solve_steady(const StableOperatorSpec& op, const Grid& grid, const SpaceFn& f);

struct PicardResult {
  Trajectory iterate;
  std::vector<double> distances;  // sup over time and nodes between successive sweeps
  bool stalled = false;           // distances stopped decreasing after three sweeps
};

PicardResult solve_by_picard(const Problem& prob, int iterations, std::uint64_t master_seed,
                             std::uint64_t path_id = 0);

struct Superlinear {
  double xi = 1.0;
  double lambda = 0.0;
};

// xi |0 v u ^ m|^{1+lambda}; m = inf leaves only the lower clip.
FieldFn truncated_amplitude(const Superlinear& sl, double m);

Trajectory solve_superlinear_truncated(const Problem& prob, const Superlinear& sl, double m,
                                       RngStream& rng);

// psi^{gamma + (theta-d)/p - alpha/2}
struct WeightExponent {
  double gamma = 0.0, theta = 1.0, p = 2.0, alpha = 1.0;
  int d = 1;
  double value() const { return gamma + (theta - d) / p - 0.5 * alpha; }
};

// max over nodes of psi^w |u| for each stored time
std::vector<double> weighted_sup(const Trajectory& traj, const Grid& grid, double w);

std::optional<double> blowup_stopping_time(const Trajectory& traj, const Grid& grid, double R,
                                           const WeightExponent& e);

struct CascadeLevel {
  double m = 0.0;
  Trajectory traj;
  std::optional<double> tau;  // first time the weighted sup exceeds m / c0
};

// c0 = max over nodes of psi^{-w}
double cascade_constant(const Grid& grid, const WeightExponent& e);

std::vector<CascadeLevel> truncation_cascade(const Problem& prob, const Superlinear& sl,
                                             const std::vector<double>& levels,
                                             const WeightExponent& e, std::uint64_t master_seed,
                                             std::uint64_t path_id);

// Isotropic alpha-stable samples with E exp(i xi.X) = exp(-|xi|^alpha).
double stable_1d(double alpha, RngStream& rng);
// Positive (a)-stable with E exp(-sA) = exp(-s^a), 0 < a < 1.
double positive_stable(double a, RngStream& rng);
Point stable_increment(double alpha, int d, double dt, RngStream& rng);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  long paths = 0;
};

struct McOptions {
  double dt = 1e-3;          // substep; killing is checked at substep ends
  std::uint64_t master_seed = 0;
};

// E[f(x + X_t); no exit before t] for L = -(-Laplace)^{alpha/2}.
McEstimate killed_semigroup_mc(double alpha, const DomainSpec& dom, const SpaceFn& f, double t,
                               const Point& x, long n_paths, const McOptions& opt);

// int_0^t P^D_{t-s} f(s, .)(x) ds along each path, trapezoid in time.
McEstimate duhamel_reference(double alpha, const DomainSpec& dom, const SpaceTimeFn& f, double t,
                             const Point& x, long n_paths, const McOptions& opt);

}  // namespace nlspde

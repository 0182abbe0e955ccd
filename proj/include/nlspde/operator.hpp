#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "nlspde/geometry.hpp"
#include "nlspde/types.hpp"

namespace nlspde {

// Periodic table of density values on a uniform net of [0, 2pi), linearly
// interpolated. Density is with respect to the angle measure d(phi).
struct DensityTable {
  std::vector<double> values;
  double operator()(double phi) const;
};

struct Atom {
  Eigen::Vector2d direction;  // unit; in d=1 only x is used (+1 or -1)
  double mass;
};

struct SphericalMeasure {
  int dim = 1;
  std::vector<Atom> atoms;
  std::optional<DensityTable> density;  // d = 2 only
  bool symmetrized = false;

  // Spherical part of c|y|^{-d-alpha} dy with c chosen so L = -(-Laplace)^{alpha/2}.
  static SphericalMeasure isotropic(int d, double alpha);
  static SphericalMeasure axis_atoms(int d, double mass);
  SphericalMeasure symmetrize() const;
  double density_at(double phi) const;
  double total_mass() const;
};

// m(t) = values[i] on [breakpoints[i-1], breakpoints[i]); values.size() == breakpoints.size()+1.
struct ModulationSchedule {
  std::vector<double> breakpoints;
  std::vector<double> values{1.0};
  double at(double t) const;
  double lower() const;
  double upper() const;
};

struct StableOperatorSpec {
  double alpha = 1.0;
  SphericalMeasure spherical;
  ModulationSchedule modulation;
};

struct NondegeneracyReport {
  double value = 0.0;
  double direction = 0.0;  // angle of the minimizing rho (d = 2)
  bool degenerate = false;
};

constexpr double kDegenerateTolerance = 1e-8;  // relative to total mass

NondegeneracyReport nondegeneracy_constant(const SphericalMeasure& mu, double alpha);

// Translation invariant lattice weights K(y) of the discrete operator; both
// y and -y are listed. `tail` is the weight of all offsets not listed, and
// every unlisted offset maps an interior node outside the domain.
struct LatticeKernel {
  std::vector<std::pair<Eigen::Vector2i, double>> entries;
  double tail = 0.0;
  double total = 0.0;
};

struct OperatorMatrix {
  int interior_size = 0;
  double alpha = 1.0;
  Matrix entries;
  Vector tail_diagonal;
  ModulationSchedule modulation;
  LatticeKernel kernel;
};

OperatorMatrix assemble_operator(const StableOperatorSpec& spec, const Grid& grid);

template <typename Derived>
Vector apply_operator(const OperatorMatrix& A, const Eigen::MatrixBase<Derived>& u, double t) {
  require(u.size() == A.interior_size, "apply_operator: dimension mismatch");
  return A.modulation.at(t) * (A.entries * u);
}

struct DirichletFormReport {
  double matrix_value;   // u^T A v
  double lattice_value;  // -1/2 sum_x sum_y K(y) (u(x+y)-u(x)) (v(x+y)-v(x))
};

DirichletFormReport dirichlet_form(const OperatorMatrix& A, const Grid& grid, const Vector& u,
                                   const Vector& v);

// Normalizing constant of (-Laplace)^{alpha/2} as a singular integral.
double fractional_laplacian_constant(int d, double alpha);
// (-Laplace)^{alpha/2} (1-|x|^2)_+^{alpha/2} on the unit ball.
double getoor_constant(int d, double alpha);
double getoor_ball_solution(double alpha, int d, double r);

// Weights c_k of the 1D splitting scheme: int_0^inf (u(x+r)+u(x-r)-2u(x)) r^{-1-alpha} dr
// ~ h^{-alpha} sum_k c_k (u(x+kh)+u(x-kh)-2u(x)).
double line_weight(double alpha, long k);
double line_weight_tail(double alpha, long K);  // sum over k > K
double line_weight_sum(double alpha);           // sum over k >= 1

}  // namespace nlspde

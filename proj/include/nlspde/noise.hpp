#pragma once

#include <limits>
#include <string>

#include "nlspde/geometry.hpp"
#include "nlspde/rng.hpp"
#include "nlspde/types.hpp"

namespace nlspde {

enum class CovarianceKind { white, riesz, ou, flat };

struct CovarianceSpec {
  CovarianceKind kind = CovarianceKind::white;
  double beta = 0.0;
  double scale = 1.0;

  static CovarianceSpec white(double scale = 1.0) { return {CovarianceKind::white, 0.0, scale}; }
  static CovarianceSpec riesz(double beta, double scale = 1.0) { return {CovarianceKind::riesz, beta, scale}; }
  static CovarianceSpec ou(double beta, double scale = 1.0) { return {CovarianceKind::ou, beta, scale}; }
  static CovarianceSpec flat(double scale = 1.0) { return {CovarianceKind::flat, 0.0, scale}; }

  void validate(int d) const;
  // Density of Pi at radius r; white has none.
  double density(double r) const;
  std::string name() const;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// h^{-2d} * integral of Pi(x - y) over cell(0) x cell(offset), offset in lattice units.
double cell_pair_covariance(const CovarianceSpec& spec, int d, double h, int o1, int o2 = 0);

// <phi1, phi2>_H for fields read as cellwise constant functions.
double h_inner(const Vector& phi1, const Vector& phi2, const CovarianceSpec& spec, const Grid& grid);

struct NoiseFactor {
  CovarianceSpec spec;
  Matrix C;
  Matrix F;              // n x rank, F F^T = C up to repair_shift
  Vector eigenvalues;    // ascending; empty for white, closed form for flat
  double repair_shift = 0.0;
  int rank = 0;
};

constexpr double kNegativeEigenTolerance = 1e-10;  // relative to ||C||
constexpr double kRankTolerance = 1e-13;           // relative to the largest eigenvalue

NoiseFactor covariance_factor(const CovarianceSpec& spec, const Grid& grid);

// sqrt(dt) F z with z standard normal of length rank.
Vector sample_increment(const NoiseFactor& factor, double dt, RngStream& rng);
// The same map with the normals supplied by the caller.
Vector increment_from_normals(const NoiseFactor& factor, double dt, const Vector& z);

enum class DalangBranch { nonpositive, power, logarithmic, bounded };

struct DalangVerdict {
  bool pass = false;
  DalangBranch branch = DalangBranch::bounded;
  double kappa = 0.0;     // alpha/2 - gamma - d/(2s)
  double integral = 0.0;  // +inf when divergent
};

std::string branch_name(DalangBranch b);

// s = kInfinity is allowed.
DalangVerdict dalang_check(const CovarianceSpec& spec, double s, double gamma, double alpha, int d);

// Radial Bessel-type kernel R_beta(|x|).
double bessel_kernel(double beta, int d, double r);
// Integral of R_beta over R^d, by radial quadrature.
double bessel_kernel_mass(double beta, int d);

double sharp_bound_H(double s, double gamma, double alpha, int d, double r);

double unit_sphere_area(int d);

}  // namespace nlspde

#include "nlspde/noise.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <numbers>

#include "nlspde/quadrature.hpp"

namespace nlspde {

using std::numbers::pi;

void CovarianceSpec::validate(int d) const {
  require(scale > 0 && std::isfinite(scale), "covariance scale must be positive");
  if (kind == CovarianceKind::riesz) require(beta > 0 && beta < d, "riesz requires 0 < beta < d");
  if (kind == CovarianceKind::ou) require(beta > 0 && beta <= 2, "ou requires 0 < beta <= 2");
}

double CovarianceSpec::density(double r) const {
  switch (kind) {
    case CovarianceKind::riesz: return scale * std::pow(r, -beta);
    case CovarianceKind::ou: return scale * std::exp(-std::pow(r, beta));
    case CovarianceKind::flat: return scale;
    case CovarianceKind::white: break;
  }
  throw PreconditionError("white noise has no density");
}

std::string CovarianceSpec::name() const {
  switch (kind) {
    case CovarianceKind::white: return "white";
    case CovarianceKind::riesz: return "riesz";
    case CovarianceKind::ou: return "ou";
    case CovarianceKind::flat: return "flat";
  }
  return "?";
}

double unit_sphere_area(int d) { return d == 1 ? 2.0 : d == 2 ? 2 * pi : 4 * pi; }

namespace {

// integral over s in [0,1]^2 of k(h|s|) (a1 + b1 s1)(a2 + b2 s2), polar about s = 0
double corner_integral(const CovarianceSpec& spec, double h, double a1, double b1, double a2,
                       double b2) {
  const auto& g = quad::gauss_legendre(24);
  double total = 0.0;
  for (int half = 0; half < 2; ++half) {
    double p0 = half * pi / 4, p1 = p0 + pi / 4;
    for (int i = 0; i < g.nodes.size(); ++i) {
      double phi = 0.5 * (p0 + p1) + 0.5 * (p1 - p0) * g.nodes[i];
      double w = 0.5 * (p1 - p0) * g.weights[i];
      double c = std::cos(phi), s = std::sin(phi), rho = 1.0 / std::max(c, s);
      double radial;
      if (spec.kind == CovarianceKind::riesz) {
        double b = spec.beta;
        radial = std::pow(h, -b) *
                 (a1 * a2 * std::pow(rho, 2 - b) / (2 - b) +
                  (a1 * b2 * s + b1 * a2 * c) * std::pow(rho, 3 - b) / (3 - b) +
                  b1 * b2 * c * s * std::pow(rho, 4 - b) / (4 - b));
        radial *= spec.scale;
      } else {
        radial = quad::tanh_sinh(
            [&](double r) {
              return spec.density(h * r) * (a1 + b1 * r * c) * (a2 + b2 * r * s) * r;
            },
            0.0, rho, 1e-12);
      }
      total += w * radial;
    }
  }
  return total;
}

double pair_1d(const CovarianceSpec& spec, double h, int o) {
  if (spec.kind == CovarianceKind::riesz) {
    double b = spec.beta;
    auto F = [b](double t) { return std::pow(std::abs(t), 2 - b) / ((1 - b) * (2 - b)); };
    return spec.scale * std::pow(h, -b) * (F(o + 1.0) + F(o - 1.0) - 2 * F(double(o)));
  }
  auto f = [&](double t) { return spec.density(h * std::abs(o + t)) * (1 - std::abs(t)); };
  std::vector<double> cuts{-1.0, 0.0, 1.0};
  if (std::abs(o) < 1) cuts.push_back(double(-o));
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k)
    if (cuts[k + 1] > cuts[k]) s += quad::tanh_sinh(f, cuts[k], cuts[k + 1], 1e-13);
  return s;
}

double pair_2d(const CovarianceSpec& spec, double h, int o1, int o2) {
  double total = 0.0;
  for (int t1 : {-1, 1})
    for (int t2 : {-1, 1}) {
      // quadrant square with corners 0 and (t1, t2); singular point at -o
      bool corner = (o1 == 0 || o1 == -t1) && (o2 == 0 || o2 == -t2);
      if (corner) {
        double c1 = -o1, c2 = -o2;
        double d1 = c1 == 0 ? t1 : -t1, d2 = c2 == 0 ? t2 : -t2;
        double a1 = 1 - std::abs(c1), a2 = 1 - std::abs(c2);
        double b1 = (1 - std::abs(c1 + d1)) - a1, b2 = (1 - std::abs(c2 + d2)) - a2;
        total += corner_integral(spec, h, a1, b1, a2, b2);
      } else {
        auto f = [&](double x, double y) {
          double r = h * std::hypot(o1 + x, o2 + y);
          return spec.density(r) * (1 - std::abs(x)) * (1 - std::abs(y));
        };
        double x0 = std::min(0, t1), y0 = std::min(0, t2);
        total += quad::adaptive_rect(f, x0, x0 + 1, y0, y0 + 1, 1e-12, 8);
      }
    }
  return total;
}

}  // namespace

double cell_pair_covariance(const CovarianceSpec& spec, int d, double h, int o1, int o2) {
  spec.validate(d);
  switch (spec.kind) {
    case CovarianceKind::white:
      return (o1 == 0 && o2 == 0) ? spec.scale / std::pow(h, d) : 0.0;
    case CovarianceKind::flat: return spec.scale;
    default: break;
  }
  o1 = std::abs(o1);
  o2 = std::abs(o2);
  return d == 1 ? pair_1d(spec, h, o1) : pair_2d(spec, h, o1, o2);
}

namespace {

Matrix assemble_covariance(const CovarianceSpec& spec, const Grid& grid) {
  const int n = grid.size(), d = grid.dim();
  std::map<std::pair<int, int>, double> cache;
  auto pair = [&](int a, int b) {
    a = std::abs(a);
    b = std::abs(b);
    if (d == 2 && a > b) std::swap(a, b);  // square cells and radial kernel
    auto it = cache.find({a, b});
    if (it != cache.end()) return it->second;
    double v = d == 1 ? cell_pair_covariance(spec, 1, grid.h, a) : cell_pair_covariance(spec, 2, grid.h, a, b);
    cache[{a, b}] = v;
    return v;
  };
  Matrix C(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      int a = grid.lattice(0, j) - grid.lattice(0, i);
      int b = d == 2 ? grid.lattice(1, j) - grid.lattice(1, i) : 0;
      C(i, j) = C(j, i) = pair(a, b);
    }
  return C;
}

}  // namespace

double h_inner(const Vector& phi1, const Vector& phi2, const CovarianceSpec& spec,
               const Grid& grid) {
  require(phi1.size() == grid.size() && phi2.size() == grid.size(), "h_inner: dimension mismatch");
  const double vol = grid.cell_volume();
  if (spec.kind == CovarianceKind::white) return spec.scale * vol * phi1.dot(phi2);
  if (spec.kind == CovarianceKind::flat) return spec.scale * (vol * phi1.sum()) * (vol * phi2.sum());
  Matrix C = assemble_covariance(spec, grid);
  return vol * vol * phi1.dot(C * phi2);
}

NoiseFactor covariance_factor(const CovarianceSpec& spec, const Grid& grid) {
  require(grid.size() <= 4096, "covariance_factor: at most 4096 interior nodes");
  spec.validate(grid.dim());
  const int n = grid.size();
  NoiseFactor f;
  f.spec = spec;
  if (spec.kind == CovarianceKind::white) {
    double v = spec.scale / grid.cell_volume();
    f.C = v * Matrix::Identity(n, n);
    f.F = std::sqrt(v) * Matrix::Identity(n, n);
    f.rank = n;
    return f;
  }
  if (spec.kind == CovarianceKind::flat) {
    f.C = Matrix::Constant(n, n, spec.scale);
    f.F = Matrix::Constant(n, 1, std::sqrt(spec.scale));
    f.eigenvalues = Vector::Zero(n);
    f.eigenvalues[n - 1] = n * spec.scale;
    f.rank = 1;
    return f;
  }
  f.C = assemble_covariance(spec, grid);
  Eigen::SelfAdjointEigenSolver<Matrix> es(f.C);
  f.eigenvalues = es.eigenvalues();
  const double top = f.eigenvalues[n - 1];
  const double norm = f.C.norm();
  if (f.eigenvalues[0] < -kNegativeEigenTolerance * norm)
    throw NumericalError("covariance_factor: covariance is not positive semidefinite");
  int first = 0;
  while (first < n && f.eigenvalues[first] <= kRankTolerance * top) {
    f.repair_shift = std::max(f.repair_shift, std::abs(f.eigenvalues[first]));
    ++first;
  }
  f.rank = n - first;
  f.F = es.eigenvectors().rightCols(f.rank) *
        f.eigenvalues.tail(f.rank).cwiseSqrt().asDiagonal();
  return f;
}

Vector increment_from_normals(const NoiseFactor& factor, double dt, const Vector& z) {
  require(dt > 0, "sample_increment: dt > 0");
  require(z.size() == factor.rank, "increment: wrong number of normals");
  const double sd = std::sqrt(dt);
  if (factor.spec.kind == CovarianceKind::white) return sd * factor.F(0, 0) * z;
  if (factor.spec.kind == CovarianceKind::flat) return Vector::Constant(factor.F.rows(), sd * factor.F(0, 0) * z[0]);
  return sd * (factor.F * z);
}

Vector sample_increment(const NoiseFactor& factor, double dt, RngStream& rng) {
  Vector z(factor.rank);
  for (int k = 0; k < factor.rank; ++k) z[k] = rng.normal();
  return increment_from_normals(factor, dt, z);
}

std::string branch_name(DalangBranch b) {
  switch (b) {
    case DalangBranch::nonpositive: return "nonpositive";
    case DalangBranch::power: return "power";
    case DalangBranch::logarithmic: return "log";
    case DalangBranch::bounded: return "bounded";
  }
  return "?";
}

DalangVerdict dalang_check(const CovarianceSpec& spec, double s, double gamma, double alpha, int d) {
  require(s > 1, "dalang_check: s must lie in (1, inf]");
  require(gamma > 0 && gamma < 0.5 * alpha, "dalang_check: gamma must lie in (0, alpha/2)");
  spec.validate(d);
  DalangVerdict v;
  const double ds = std::isinf(s) ? 0.0 : d / (2 * s);
  v.kappa = 0.5 * alpha - gamma - ds;
  const double S = unit_sphere_area(d), c = spec.scale;
  const double inf = kInfinity;
  if (v.kappa <= 0) {
    v.branch = DalangBranch::nonpositive;
    v.integral = inf;
    v.pass = false;
    return v;
  }
  // radial integral of w(r) r^{d-1} Pi-density over (0,1) for the ou kernel
  auto ou_radial = [&](auto w) {
    return c * S * quad::tanh_sinh([&](double r) { return w(r) * std::pow(r, d - 1) * std::exp(-std::pow(r, spec.beta)); }, 0, 1, 1e-12);
  };
  if (v.kappa < 0.5 * d) {
    v.branch = DalangBranch::power;
    const double e = 2 * v.kappa - d;  // alpha - 2 gamma - d/s - d
    switch (spec.kind) {
      case CovarianceKind::white: v.integral = inf; break;
      case CovarianceKind::riesz:
        v.integral = (e - spec.beta + d > 0) ? c * S / (e - spec.beta + d) : inf;
        break;
      case CovarianceKind::flat: v.integral = c * S / (e + d); break;
      case CovarianceKind::ou: {
        // e + d = 2 kappa > 0; r = t^{1/(e+d)} removes the endpoint singularity
        const double p = e + d;
        v.integral = c * S / p * quad::tanh_sinh([&](double t) { return std::exp(-std::pow(t, spec.beta / p)); }, 0, 1, 1e-13);
        break;
      }
    }
  } else if (v.kappa == 0.5 * d) {
    v.branch = DalangBranch::logarithmic;
    switch (spec.kind) {
      case CovarianceKind::white: v.integral = inf; break;
      case CovarianceKind::riesz: v.integral = c * S / ((d - spec.beta) * (d - spec.beta)); break;
      case CovarianceKind::flat: v.integral = c * S / (d * d); break;
      case CovarianceKind::ou: v.integral = ou_radial([](double r) { return -std::log(r); }); break;
    }
  } else {
    v.branch = DalangBranch::bounded;
    switch (spec.kind) {
      case CovarianceKind::white: v.integral = c; break;
      case CovarianceKind::riesz: v.integral = c * S / (d - spec.beta); break;
      case CovarianceKind::flat: v.integral = c * S / d; break;
      case CovarianceKind::ou: v.integral = ou_radial([](double) { return 1.0; }); break;
    }
  }
  v.pass = std::isfinite(v.integral);
  return v;
}

double bessel_kernel(double beta, int d, double r) {
  require(beta > 0, "bessel_kernel: beta > 0");
  r = std::abs(r);
  const double q = 0.5 * (beta - d);
  if (r == 0.0 && q <= 0) return kInfinity;
  // t = e^u; integrand t^{beta/2} e^{-t} q(t, r) in du
  const double lr = r > 0 ? 2 * std::log(0.5 * r) : -kInfinity;
  auto f = [&](double u) { return std::exp(q * u - std::exp(u) - std::exp(lr - u)); };
  double hi = std::log(80.0 + 2 * beta);
  double lo = -30.0;
  if (r > 0) lo = 2 * std::log(0.5 * r) - std::log(250.0);
  if (q > 0) lo = std::max(lo, -40.0 / q);
  lo = std::min(lo, hi - 1.0);
  const int panels = std::max(20, static_cast<int>(std::ceil((hi - lo) / 1.5)));
  return std::pow(4 * pi, -0.5 * d) * quad::composite_gauss(f, lo, hi, panels, 20);
}

double bessel_kernel_mass(double beta, int d) {
  // v = log r; the integrand behaves like r^{min(beta, d)} as r -> 0
  double lo = -36.0 / std::min(beta, double(d)), hi = std::log(80.0);
  int panels = static_cast<int>(std::ceil((hi - lo) / 0.5));
  double v = quad::composite_gauss(
      [&](double t) { return bessel_kernel(beta, d, std::exp(t)) * std::exp(d * t); }, lo, hi,
      panels, 20);
  return unit_sphere_area(d) * v;
}

double sharp_bound_H(double s, double gamma, double alpha, int d, double r) {
  require(s > 1, "sharp_bound_H: s must lie in (1, inf]");
  const double ds = std::isinf(s) ? 0.0 : d / (2 * s);
  const double kappa = 0.5 * alpha - gamma - ds;
  require(kappa > 0 && kappa < d, "sharp_bound_H: alpha/2 - gamma - d/2s must lie in (0, d)");
  r = std::abs(r);
  if (kappa < 0.5 * d) return std::pow(r, 2 * kappa - d);
  if (kappa == 0.5 * d) return std::abs(std::log(r));
  return 1.0;
}

}  // namespace nlspde

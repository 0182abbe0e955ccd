#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nlspde/noise.hpp"
#include "nlspde/quadrature.hpp"

using namespace nlspde;
using std::numbers::pi;

namespace {

// int_{-1}^{1} (1 - |t|) exp(-s (o + t)^2) dt in closed form
double tent_gauss(double s, int o) {
  const double rs = std::sqrt(s), c = 0.5 * std::sqrt(pi) / rs;
  // int (A + B u) e^{-s u^2} du over [u0, u1]
  auto piece = [&](double A, double B, double u0, double u1) {
    return A * c * (std::erf(rs * u1) - std::erf(rs * u0)) - B / (2 * s) * (std::expm1(-s * u1 * u1) - std::expm1(-s * u0 * u0));
  };
  return piece(1 - o, 1, o - 1, o) + piece(1 + o, -1, o, o + 1);
}

// int_{[-1,1]^2} |o+t|^{-b} (1-|t1|)(1-|t2|) dt, writing |x|^{-b} as a Gaussian mixture
double riesz_pair_oracle(double b, int o1, int o2) {
  auto f = [&](double v) {
    double s = std::exp(v);
    return std::pow(s, 0.5 * b) * tent_gauss(s, o1) * tent_gauss(s, o2);
  };
  return quad::composite_gauss(f, -400, 100, 500, 20) / std::tgamma(0.5 * b);
}

// int_0^1 r^q dr = int_0^inf e^{-(q+1)t} dt; three cutoffs, Aitken extrapolation,
// and divergence when the increments stop shrinking
double power_integral_oracle(double q) {
  auto cut = [q](double v) { return quad::composite_gauss([q](double t) { return std::exp(-t * (q + 1)); }, 0, v, 4 * int(v), 20); };
  double i1 = cut(20), i2 = cut(40), i3 = cut(60);
  double d1 = i2 - i1, d2 = i3 - i2;
  if (d2 >= d1) return kInfinity;
  return i3 - d2 * d2 / (d2 - d1);
}

}  // namespace

TEST_CASE("h inner product") {
  Grid g = make_grid(DomainSpec::interval(0, 1), 1.0 / 32);
  Vector e = Vector::Zero(g.size());
  e[5] = 1.0;
  CHECK(h_inner(e, e, CovarianceSpec::white(2.0), g) == doctest::Approx(2.0 / 32));

  Vector a = Vector::Random(g.size()), b = Vector::Random(g.size());
  CHECK(h_inner(a, b, CovarianceSpec::flat(), g) == doctest::Approx((a.sum() / 32) * (b.sum() / 32)).epsilon(1e-13));

  // separated bumps against a direct double sum with point evaluation
  Grid f = make_grid(DomainSpec::interval(0, 4), 1.0 / 64);
  Vector p1 = Vector::Zero(f.size()), p2 = Vector::Zero(f.size());
  for (int k = 0; k < f.size(); ++k) {
    double x = f.nodes(0, k);
    if (x > 0.5 && x < 1.0) p1[k] = std::pow(std::sin(2 * pi * (x - 0.5)), 2);
    if (x > 2.5 && x < 3.0) p2[k] = std::pow(std::sin(2 * pi * (x - 2.5)), 2);
  }
  double direct = 0.0;
  for (int i = 0; i < f.size(); ++i)
    for (int j = 0; j < f.size(); ++j)
      if (p1[i] != 0 && p2[j] != 0) direct += p1[i] * p2[j] * std::pow(std::abs(f.nodes(0, i) - f.nodes(0, j)), -0.5) * f.h * f.h;
  CHECK(h_inner(p1, p2, CovarianceSpec::riesz(0.5), f) == doctest::Approx(direct).epsilon(1e-4));
}

TEST_CASE("cell pair covariances against independent quadrature") {
  for (double b : {0.4, 1.3})
    for (auto o : {std::pair{0, 0}, std::pair{1, 0}, std::pair{1, 1}, std::pair{3, 2}}) {
      double h = 0.1;
      double v = cell_pair_covariance(CovarianceSpec::riesz(b), 2, h, o.first, o.second);
      CHECK(v == doctest::Approx(std::pow(h, -b) * riesz_pair_oracle(b, o.first, o.second)).epsilon(1e-8));
    }
  // d = 1 closed form against quadrature
  for (int o : {0, 1, 4}) {
    double v = cell_pair_covariance(CovarianceSpec::riesz(0.5), 1, 1.0, o);
    double q = quad::tanh_sinh([o](double t) { return std::pow(std::abs(o + t), -0.5) * (1 - std::abs(t)); }, -1, 0, 1e-13) +
               quad::tanh_sinh([o](double t) { return std::pow(std::abs(o + t), -0.5) * (1 - std::abs(t)); }, 0, 1, 1e-13);
    CHECK(v == doctest::Approx(q).epsilon(1e-9));
  }
  // ou with beta = 2 separates in 2D
  double h = 0.3;
  double ou2 = cell_pair_covariance(CovarianceSpec::ou(2.0), 2, h, 1, 2);
  double prod = cell_pair_covariance(CovarianceSpec::ou(2.0), 1, h, 1) * cell_pair_covariance(CovarianceSpec::ou(2.0), 1, h, 2);
  CHECK(ou2 == doctest::Approx(prod).epsilon(1e-9));
}

TEST_CASE("H inner product is positive semidefinite on random fields") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<std::pair<Grid, CovarianceSpec>> cases = {
      {make_grid(DomainSpec::interval(0, 1), 1.0 / 40), CovarianceSpec::riesz(0.7)},
      {make_grid(DomainSpec::interval(0, 1), 1.0 / 40), CovarianceSpec::ou(1.0)},
      {make_grid(DomainSpec::disk({0, 0}, 1), 1.0 / 5), CovarianceSpec::riesz(1.2)},
      {make_grid(DomainSpec::disk({0, 0}, 1), 1.0 / 5), CovarianceSpec::ou(0.6)},
      {make_grid(DomainSpec::annulus({0, 0}, 0.4, 1), 1.0 / 5), CovarianceSpec::white()}};
  for (auto& [g, spec] : cases)
    for (int t = 0; t < 20; ++t) {
      Vector phi(g.size());
      for (int k = 0; k < g.size(); ++k) phi[k] = n01(rng);
      CHECK(h_inner(phi, phi, spec, g) >= -1e-12 * phi.squaredNorm());
      Vector psi = Vector::Random(g.size());
      CHECK(h_inner(phi, psi, spec, g) == doctest::Approx(h_inner(psi, phi, spec, g)).epsilon(1e-12));
    }
}

TEST_CASE("covariance factor") {
  Grid g = make_grid(DomainSpec::interval(0, 1), 1.0 / 64);
  auto w = covariance_factor(CovarianceSpec::white(1.5), g);
  CHECK((w.C - w.C.diagonal().asDiagonal().toDenseMatrix()).norm() == 0.0);
  CHECK(w.C(3, 3) == doctest::Approx(1.5 * 64));
  CHECK(w.F(3, 3) == doctest::Approx(std::sqrt(1.5 * 64)));

  auto fl = covariance_factor(CovarianceSpec::flat(0.8), g);
  CHECK(fl.rank == 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(fl.C);
  int nonzero = 0;
  for (int k = 0; k < g.size(); ++k) nonzero += std::abs(es.eigenvalues()[k]) > 1e-10 * fl.C.norm();
  CHECK(nonzero == 1);
  CHECK((fl.F * fl.F.transpose() - fl.C).norm() <= 1e-14 * fl.C.norm());

  auto ou = covariance_factor(CovarianceSpec::ou(2.0), g);
  CHECK(ou.eigenvalues.minCoeff() >= -kNegativeEigenTolerance * ou.C.norm());
  CHECK(ou.repair_shift <= 1e-12 * ou.C.norm());

  for (auto spec : {CovarianceSpec::riesz(0.5), CovarianceSpec::ou(1.0), CovarianceSpec::ou(2.0)}) {
    auto f = covariance_factor(spec, g);
    double err = (f.F * f.F.transpose() - f.C).norm();
    CHECK(err <= f.repair_shift * g.size() + 1e-12 * f.C.norm());
  }
}

TEST_CASE("sampling: mean band and determinism") {
  Grid g = make_grid(DomainSpec::interval(0, 1), 1.0 / 16);
  auto f = covariance_factor(CovarianceSpec::riesz(0.5), g);
  const double dt = 0.01;
  const int N = 10000;
  RngStream rng(42, 0);
  Vector mean = Vector::Zero(g.size());
  for (int k = 0; k < N; ++k) mean += sample_increment(f, dt, rng);
  mean /= N;
  for (int i = 0; i < g.size(); ++i) CHECK(std::abs(mean[i]) <= 4 * std::sqrt(dt * f.C(i, i) / N));
  RngStream a(9, 4), b(9, 4), c(9, 5);
  Vector x = sample_increment(f, dt, a), y = sample_increment(f, dt, b), z = sample_increment(f, dt, c);
  CHECK((x - y).norm() == 0.0);
  CHECK((x - z).norm() > 0.0);
}

TEST_CASE("dalang check closed forms") {
  const double inf = kInfinity;
  // white, d = 1, s = inf: pass iff gamma < alpha/2 - 1/2
  CHECK(dalang_check(CovarianceSpec::white(), inf, 0.3, 1.8, 1).pass);
  CHECK_FALSE(dalang_check(CovarianceSpec::white(), inf, 0.45, 1.8, 1).pass);
  // white, s = 2: gamma < alpha/2 - 1/2 - 1/4
  CHECK(dalang_check(CovarianceSpec::white(), 2.0, 0.15 - 1e-6, 1.8, 1).pass);
  CHECK_FALSE(dalang_check(CovarianceSpec::white(), 2.0, 0.15 + 1e-6, 1.8, 1).pass);
  // riesz: gamma < alpha/2 - beta/2 - d/2s
  {
    double a = 1.5, b = 0.5, s = 4.0;
    double thr = a / 2 - b / 2 - 2 / (2 * s);
    CHECK(dalang_check(CovarianceSpec::riesz(b), s, thr - 1e-6, a, 2).pass);
    CHECK_FALSE(dalang_check(CovarianceSpec::riesz(b), s, thr + 1e-6, a, 2).pass);
  }
  // log branch
  auto v = dalang_check(CovarianceSpec::riesz(0.5), inf, 0.3, 1.6, 1);
  CHECK(v.branch == DalangBranch::logarithmic);
  CHECK(v.integral == doctest::Approx(2.0 / 0.25));
  CHECK_FALSE(dalang_check(CovarianceSpec::white(), inf, 0.3, 1.6, 1).pass);
  CHECK_THROWS_AS(dalang_check(CovarianceSpec::white(), inf, 0.9, 1.6, 1), PreconditionError);
  CHECK_THROWS_AS(dalang_check(CovarianceSpec::white(), inf, 0.0, 1.6, 1), PreconditionError);
  // ou always passes once kappa > 0; value matches quadrature
  auto o = dalang_check(CovarianceSpec::ou(1.0), 3.0, 0.2, 1.2, 2);
  double e = 2 * o.kappa - 2;
  // int_0^1 r^p e^{-r} dr as an alternating series
  double q = 0.0, fact = 1.0;
  for (int k = 0; k < 40; ++k) {
    if (k > 0) fact *= k;
    q += (k % 2 ? -1.0 : 1.0) / (fact * (e + 1 + k + 1));
  }
  q *= 2 * pi;
  CHECK(o.pass);
  CHECK(o.integral == doctest::Approx(q).epsilon(1e-9));
}

TEST_CASE("dalang branch follows kappa; riesz verdict is monotone in gamma") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  for (int t = 0; t < 2000; ++t) {
    int d = 1 + (t % 2);
    double a = 0.05 + 1.9 * U(rng), g = 0.5 * a * (0.01 + 0.98 * U(rng));
    double s = U(rng) < 0.2 ? kInfinity : 1.0 + 20 * U(rng);
    double b = d * (0.05 + 0.9 * U(rng));
    auto v = dalang_check(CovarianceSpec::riesz(b), s, g, a, d);
    double k = a / 2 - g - (std::isinf(s) ? 0 : d / (2 * s));
    DalangBranch want = k <= 0 ? DalangBranch::nonpositive
                        : k < d / 2.0 ? DalangBranch::power
                        : k == d / 2.0 ? DalangBranch::logarithmic
                                       : DalangBranch::bounded;
    CHECK(v.branch == want);
    CHECK(v.kappa == doctest::Approx(k).epsilon(1e-14));
    if (v.pass) CHECK(dalang_check(CovarianceSpec::riesz(b), s, g * U(rng), a, d).pass);
  }
}

TEST_CASE("riesz dalang closed form against radial quadrature") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  int checked = 0;
  while (checked < 20) {
    int d = 1 + (checked % 2);
    double a = 0.2 + 1.75 * U(rng), g = 0.5 * a * U(rng);
    double s = 1.2 + 10 * U(rng), b = d * (0.05 + 0.9 * U(rng));
    if (g <= 0) continue;
    double k = a / 2 - g - d / (2 * s);
    if (k <= 0.01 || k >= d / 2.0 - 0.01) continue;
    double q = 2 * k - d - b + d - 1;
    if (std::abs(q + 1) < 0.05) continue;
    auto v = dalang_check(CovarianceSpec::riesz(b), s, g, a, d);
    double oracle = power_integral_oracle(q);
    CHECK(v.pass == std::isfinite(oracle));
    if (v.pass) CHECK(v.integral == doctest::Approx(unit_sphere_area(d) * oracle).epsilon(1e-9));
    ++checked;
  }
}

TEST_CASE("bessel kernel") {
  for (double b : {0.5, 1.0, 1.5}) CHECK(std::abs(bessel_kernel_mass(b, 1) - std::tgamma(b / 2)) <= 1e-6 * std::tgamma(b / 2));
  CHECK(std::abs(bessel_kernel_mass(1.2, 2) - std::tgamma(0.6)) <= 1e-6);
  double prev = kInfinity;
  for (double r = 0.01; r < 10; r *= 1.3) {
    double v = bessel_kernel(0.7, 1, r);
    CHECK(v > 0);
    CHECK(v < prev);
    prev = v;
  }
  // small-|x| exponent beta - d by a log-log fit on dyadic radii
  for (auto [b, d] : {std::pair{0.6, 1}, std::pair{1.2, 2}}) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = 20; k <= 28; ++k) {
      double r = std::ldexp(1.0, -k), x = std::log(r), y = std::log(bessel_kernel(b, d, r));
      sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(b - d).epsilon(0.05));
  }
}

TEST_CASE("sharp bound H") {
  const double inf = kInfinity;
  CHECK(sharp_bound_H(inf, 0.1, 1.8, 1, 0.3) == 1.0);
  CHECK(sharp_bound_H(inf, 0.3, 1.6, 1, std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sharp_bound_H(2.0, 0.1, 1.5, 1, 0.5) == doctest::Approx(std::pow(0.5, -0.2)));
  CHECK_THROWS_AS(sharp_bound_H(2.0, 0.7, 1.5, 1, 0.5), PreconditionError);
}

TEST_CASE("convolution of powered Bessel kernels is bounded by H") {
  // d = 1, s = 2, alpha = 1.5, gamma = 0.1: R_{0.65}^2 * R_{0.65}^2, H = |x|^{-0.2}
  const double s = 2.0, g = 0.1, a = 1.5, beta = a / 2 - g;
  auto R2 = [&](double y) { return std::pow(bessel_kernel(beta, 1, y), s / (s - 1)); };
  auto conv = [&](double x) {
    auto f = [&](double y) { return R2(y) * R2(x - y); };
    // symmetric about x/2; both outer pieces equal int_0^inf R2(u) R2(x + u) du
    double mid = 2 * quad::tanh_sinh(f, 0, 0.5 * x, 1e-9);
    double outer = 2 * quad::semi_infinite([&](double u) { return R2(u) * R2(x + u); }, 0.0, 1e-9);
    return std::pow(mid + outer, (s - 1) / s);
  };
  std::vector<double> radii{1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 0.9, 2.0, 4.0, 8.0};
  std::vector<double> ratio;
  for (double r : radii) ratio.push_back(conv(r) / sharp_bound_H(s, g, a, 1, r));
  // the ratio settles to a positive constant as |x| -> 0
  for (size_t k = 0; k < 7; ++k) CHECK(ratio[k] > 0);
  for (size_t k = 0; k + 1 < 4; ++k) CHECK(ratio[k] > ratio[k + 1]);
  CHECK(ratio[0] / ratio[1] < ratio[1] / ratio[2]);
  CHECK(ratio[0] / ratio[1] < 1.1);
  // and decays exponentially at large |x|
  double c1 = std::log(ratio[7] / ratio[8]) / 2.0, c2 = std::log(ratio[8] / ratio[9]) / 4.0;
  CHECK(c1 > 0.5);
  CHECK(c2 == doctest::Approx(c1).epsilon(0.3));
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlspde/analysis.hpp"

using namespace nlspde;
using std::numbers::pi;

namespace {

Vector random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0, 1);
  Vector u(g.size());
  for (auto& v : u) v = N(rng);
  return u;
}

Vector getoor_field(const Grid& g, double alpha) {
  Vector u(g.size());
  for (int k = 0; k < g.size(); ++k) u[k] = getoor_ball_solution(alpha, g.dim(), g.node(k).norm());
  return u;
}

Problem small_problem(int nodes, double T, double dt) {
  Problem p;
  p.op.alpha = 1.2;
  p.op.spherical = SphericalMeasure::isotropic(1, 1.2);
  p.grid = make_grid(DomainSpec::interval(-1, 1), 2.0 / nodes);
  p.u0 = Vector::Zero(p.grid.size());
  for (int k = 0; k < p.grid.size(); ++k) p.u0[k] = std::pow(std::cos(0.5 * pi * p.grid.nodes(0, k)), 2);
  p.T = T;
  p.dt = dt;
  return p;
}

}  // namespace

TEST_CASE("weighted Lp of the unit field") {
  auto g = make_grid(DomainSpec::interval(0, 1), 1.0 / 64);
  Vector one = Vector::Ones(g.size());
  CHECK(weighted_lp_norm(one, 2, 1, g) == doctest::Approx(1.0).epsilon(1e-14));

  // theta - d = -2 is not integrable at a flat boundary
  double prev = 0;
  for (int n : {32, 64, 128, 256}) {
    auto gn = make_grid(DomainSpec::interval(0, 1), 1.0 / n);
    double v = weighted_lp_norm(Vector::Ones(gn.size()), 2, -1, gn);
    CHECK(v > 1.4 * prev);
    prev = v;
  }
}

TEST_CASE("psi shift identity") {
  std::mt19937_64 rng(4);
  for (auto dom : {DomainSpec::interval(0, 1), DomainSpec::disk({0, 0}, 1), DomainSpec::annulus({0, 0}, 0.4, 1)}) {
    auto g = make_grid(dom, dom.dim() == 1 ? 1.0 / 128 : 1.0 / 24);
    auto w = make_weight_field(g);
    Vector u = random_field(g, rng);
    for (double delta : {-0.7, 0.5, 1.0}) {
      for (double p : {2.0, 3.0}) {
        Vector shifted = u.cwiseProduct(w.psi_tilde.array().pow(delta).matrix());
        double r = weighted_lp_norm(shifted, p, 1.2, g) / weighted_lp_norm(u, p, 1.2 + delta * p, g);
        double N = std::pow(w.equivalence, std::abs(delta));
        CHECK(r >= 1 / N);
        CHECK(r <= N);
      }
    }
  }
}

TEST_CASE("norms are homogeneous and subadditive") {
  std::mt19937_64 rng(5);
  for (auto dom : {DomainSpec::interval(-1, 1), DomainSpec::disk({0, 0}, 1)}) {
    auto g = make_grid(dom, dom.dim() == 1 ? 1.0 / 64 : 1.0 / 16);
    for (int t = 0; t < 20; ++t) {
      Vector u = random_field(g, rng), v = random_field(g, rng);
      for (int n : {0, 1})
        for (double p : {1.0, 2.0, 4.5}) {
          const double th = 0.5 + t * 0.1;
          double nu = weighted_sobolev_norm(u, n, p, th, g), nv = weighted_sobolev_norm(v, n, p, th, g);
          CHECK(weighted_sobolev_norm(u + v, n, p, th, g) <= (nu + nv) * (1 + 1e-10));
          CHECK(weighted_sobolev_norm(-2.5 * u, n, p, th, g) == doctest::Approx(2.5 * nu).epsilon(1e-10));
        }
      CHECK(dyadic_layer_norm(-3 * u, 2, 1, g) == doctest::Approx(3 * dyadic_layer_norm(u, 2, 1, g)).epsilon(1e-10));
    }
  }
}

TEST_CASE("order zero is the Lp norm and constants have no gradient") {
  std::mt19937_64 rng(6);
  auto g = make_grid(DomainSpec::disk({0, 0}, 1), 1.0 / 16);
  Vector u = random_field(g, rng);
  CHECK(weighted_sobolev_norm(u, 0, 3, 1.7, g) == weighted_lp_norm(u, 3, 1.7, g));
  Vector c = Vector::Constant(g.size(), 2.0);
  CHECK(grid_gradient(c, g).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(weighted_sobolev_norm(c, 1, 2, 2, g) == doctest::Approx(weighted_lp_norm(c, 2, 2, g)).epsilon(1e-12));
}

TEST_CASE("gradient is second order inside and first order at the edge") {
  // u = cos(pi x) on (0,1); u' = -pi sin(pi x), u'' nonzero at the edge
  double prev_in = 0, prev_edge = 0;
  for (int n : {32, 64, 128}) {
    auto g = make_grid(DomainSpec::interval(0, 1), 1.0 / n);
    Vector u(g.size());
    for (int k = 0; k < g.size(); ++k) u[k] = std::cos(pi * g.nodes(0, k));
    Matrix D = grid_gradient(u, g);
    double in = 0, edge = 0;
    for (int k = 0; k < g.size(); ++k) {
      double err = std::abs(D(0, k) + pi * std::sin(pi * g.nodes(0, k)));
      (k == 0 || k + 1 == g.size() ? edge : in) = std::max(k == 0 || k + 1 == g.size() ? edge : in, err);
    }
    if (prev_in > 0) {
      CHECK(prev_in / in == doctest::Approx(4).epsilon(0.05));
      CHECK(prev_edge / edge == doctest::Approx(2).epsilon(0.1));
    }
    prev_in = in, prev_edge = edge;
  }
}

TEST_CASE("embedding monotone in theta") {
  std::mt19937_64 rng(7);
  for (auto dom : {DomainSpec::interval(0, 3), DomainSpec::disk({0, 0}, 0.4), DomainSpec::annulus({0, 0}, 0.5, 1)}) {
    auto g = make_grid(dom, dom.dim() == 1 ? 3.0 / 100 : 1.0 / 40);
    const double diam = dom.diameter();
    for (int t = 0; t < 10; ++t) {
      Vector u = random_field(g, rng);
      for (double p : {1.5, 2.0, 5.0}) {
        const double th = 0.3 * t, th2 = th + 0.7;
        CHECK(weighted_lp_norm(u, p, th2, g) <= std::pow(diam, (th2 - th) / p) * weighted_lp_norm(u, p, th, g) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("dyadic layers match the weighted norm up to constants") {
  // at theta = d the cutoffs sum to one with at most three overlapping,
  // so the ratio^p lies in [3^{1-p}, 1]
  std::mt19937_64 rng(8);
  for (auto dom : {DomainSpec::interval(0, 1), DomainSpec::disk({0, 0}, 1)}) {
    auto g = make_grid(dom, dom.dim() == 1 ? 1.0 / 256 : 1.0 / 32);
    for (double p : {1.0, 2.0, 4.0}) {
      Vector u = random_field(g, rng);
      const double th = dom.dim();
      double r = std::pow(dyadic_layer_norm(u, p, th, g) / weighted_lp_norm(u, p, th, g), p);
      CHECK(r <= 1 + 1e-12);
      CHECK(r >= std::pow(3.0, 1 - p) * (1 - 1e-12));
    }
  }
  // other theta: e^n sits within (e^{-3/2}, e^{1/2}) d on the support
  auto g = make_grid(DomainSpec::interval(0, 1), 1.0 / 256);
  Vector u = random_field(g, rng);
  for (double th : {0.2, 1.8}) {
    double r = std::pow(dyadic_layer_norm(u, 2, th, g) / weighted_lp_norm(u, 2, th, g), 2);
    double e = th - 1;
    CHECK(r <= std::max(std::exp(-1.5 * e), std::exp(0.5 * e)) * (1 + 1e-12));
    CHECK(r >= std::min(std::exp(-1.5 * e), std::exp(0.5 * e)) / 3 * (1 - 1e-12));
  }
}

TEST_CASE("order-one norm of the ball solution settles under refinement") {
  double prev = 0;
  for (int n : {256, 512, 1024}) {
    auto g = make_grid(DomainSpec::interval(-1, 1), 2.0 / n);
    double v = weighted_sobolev_norm(getoor_field(g, 1.0), 1, 2, 1, g);
    CHECK(std::isfinite(v));
    if (prev > 0) CHECK(std::abs(v / prev - 1) <= 0.05);
    prev = v;
  }
}

TEST_CASE("boundary decay exponent") {
  for (auto dom : {DomainSpec::interval(0, 1), DomainSpec::disk({0, 0}, 1)}) {
    auto g = make_grid(dom, dom.dim() == 1 ? 1.0 / 512 : 1.0 / 128);
    Vector u = g.dist.array().pow(0.7).matrix();
    auto fit = boundary_decay_exponent(u, g);
    CHECK(fit.exponent == doctest::Approx(0.7).epsilon(0.02 / 0.7));
    CHECK(boundary_decay_exponent(Vector::Ones(g.size()), g).exponent == doctest::Approx(0).scale(1));
    CHECK(boundary_decay_exponent(37.5 * u, g).exponent == doctest::Approx(fit.exponent).epsilon(1e-12));
  }
  auto g = make_grid(DomainSpec::interval(-1, 1), 2.0 / 512);
  CHECK(std::abs(boundary_decay_exponent(getoor_field(g, 1.4), g).exponent - 0.7) <= 0.05);

  auto coarse = make_grid(DomainSpec::interval(0, 1), 1.0 / 8);
  CHECK_THROWS_AS(boundary_decay_exponent(Vector::Ones(coarse.size()), coarse), PreconditionError);
  Vector neg = -Vector::Ones(g.size());
  CHECK_THROWS_AS(boundary_decay_exponent(neg, g), PreconditionError);
}

TEST_CASE("time Holder exponent") {
  auto g = make_grid(DomainSpec::interval(-1, 1), 2.0 / 32);
  Vector v = getoor_field(g, 1.0);
  Trajectory tr;
  for (int k = 0; k <= 128; ++k) tr.times.push_back(k * 0.01);
  tr.fields.resize(g.size(), 129);
  for (int k = 0; k <= 128; ++k) tr.fields.col(k) = tr.times[k] * v;
  NormSpec spec;
  auto fit = time_holder_exponent({tr}, spec, g);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.exponent == doctest::Approx(1).epsilon(1e-10));
  CHECK(fit.lags.size() == 6);

  // random walk in time: mean increment grows like lag^{1/2}
  Trajectory walk;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> N(0, 1);
  walk.fields.resize(g.size(), 4097);
  double w = 0;
  for (int k = 0; k <= 4096; ++k) {
    walk.times.push_back(k * 1e-3);
    walk.fields.col(k) = w * v;
    w += std::sqrt(1e-3) * N(rng);
  }
  CHECK(time_holder_exponent({walk}, spec, g).exponent == doctest::Approx(0.5).epsilon(0.1));

  for (int k = 0; k <= 128; ++k) tr.fields.col(k) = v;
  CHECK(time_holder_exponent({tr}, spec, g).degenerate);

  Trajectory shortt;
  shortt.times.resize(40);
  shortt.fields = Matrix::Zero(g.size(), 40);
  CHECK_THROWS_AS(time_holder_exponent({shortt}, spec, g), PreconditionError);
}

TEST_CASE("stochastic run has a positive time exponent") {
  auto p = small_problem(32, 1.0, 1.0 / 128);
  p.noise = covariance_factor(CovarianceSpec::ou(1.0), p.grid);
  p.amplitude = [](double, const Point&, double u) { return 0.5 * std::sin(u) + 0.5; };
  std::vector<Trajectory> paths;
  for (int k = 0; k < 40; ++k) {
    RngStream rng(11, k);
    paths.push_back(solve_semilinear(p, rng));
  }
  auto fit = time_holder_exponent(paths, NormSpec{}, p.grid);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.exponent >= 0.2);
  CHECK(fit.exponent <= 1.0);
}

TEST_CASE("solution space norm") {
  auto p = small_problem(32, 0.5, 0.05);
  SolutionNormParams par{2, 1, p.op.alpha};
  Trajectory zero;
  for (int k = 0; k <= 10; ++k) zero.times.push_back(0.05 * k);
  zero.fields = Matrix::Zero(p.grid.size(), 11);
  Problem pz = p;
  pz.u0.setZero();
  auto n0 = solution_space_norm({path_fields(pz, zero)}, pz.u0, par, p.grid);
  CHECK(n0.total() == 0.0);

  // linear problem: Du = f, Su = sigma pointwise
  p.drift = [](double, const Point& x, double) { return 1 + x[0]; };
  p.sequence = {[](double, const Point&, double) { return 0.3; }};
  RngStream rng(3, 0);
  auto tr = solve_semilinear(p, rng);
  auto pf = path_fields(p, tr);
  CHECK(pf.su.cwiseAbs().minCoeff() == doctest::Approx(0.3));
  CHECK(pf.du(0, 3) == doctest::Approx(1 + p.grid.nodes(0, 0)));
  auto base = solution_space_norm({pf}, p.u0, par, p.grid);
  CHECK(base.u > 0);
  CHECK(base.f > 0);
  // g piece: 0.3 times the L_{2,1} norm of the unit field over [0, T]
  CHECK(base.g == doctest::Approx(0.3 * std::sqrt(0.5 * 2.0)).epsilon(1e-12));

  PathFields scaled = pf;
  scaled.u *= 3, scaled.du *= 3, scaled.su *= 3;
  auto s3 = solution_space_norm({scaled}, 3 * p.u0, par, p.grid);
  CHECK(s3.total() == doctest::Approx(3 * base.total()).epsilon(1e-12));
  CHECK(s3.data() == doctest::Approx(3 * base.data()).epsilon(1e-12));

  // two identical paths average to the same value
  auto twice = solution_space_norm({pf, pf}, p.u0, par, p.grid);
  CHECK(twice.total() == doctest::Approx(base.total()).epsilon(1e-12));

  PathFields bad = pf;
  bad.du.conservativeResize(Eigen::NoChange, 3);
  CHECK_THROWS_AS(solution_space_norm({bad}, p.u0, par, p.grid), PreconditionError);
}

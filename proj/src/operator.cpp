#include "nlspde/operator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <numbers>
#include <thread>

#include "nlspde/quadrature.hpp"

namespace nlspde {

using std::numbers::pi;

double DensityTable::operator()(double phi) const {
  const int n = static_cast<int>(values.size());
  double t = phi / (2 * pi) * n;
  t -= n * std::floor(t / n);
  int i = static_cast<int>(std::floor(t));
  double f = t - i;
  i %= n;
  return (1 - f) * values[i] + f * values[(i + 1) % n];
}

SphericalMeasure SphericalMeasure::isotropic(int d, double alpha) {
  require(d == 1 || d == 2, "isotropic: d must be 1 or 2");
  double c = fractional_laplacian_constant(d, alpha);
  SphericalMeasure mu;
  mu.dim = d;
  if (d == 1) {
    mu.atoms = {{Eigen::Vector2d(1, 0), c}, {Eigen::Vector2d(-1, 0), c}};
  } else {
    mu.density = DensityTable{std::vector<double>(720, c)};
  }
  mu.symmetrized = true;
  return mu;
}

SphericalMeasure SphericalMeasure::axis_atoms(int d, double mass) {
  SphericalMeasure mu;
  mu.dim = d;
  for (int a = 0; a < d; ++a)
    for (double s : {1.0, -1.0}) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e[a] = s;
      mu.atoms.push_back({e, mass});
    }
  mu.symmetrized = true;
  return mu;
}

SphericalMeasure SphericalMeasure::symmetrize() const {
  SphericalMeasure out;
  out.dim = dim;
  auto add = [&](const Eigen::Vector2d& th, double m) {
    for (auto& a : out.atoms)
      if ((a.direction - th).norm() < 1e-12) {
        a.mass += m;
        return;
      }
    out.atoms.push_back({th, m});
  };
  for (const auto& a : atoms) {
    require(a.mass >= 0, "atom masses must be nonnegative");
    Eigen::Vector2d th = a.direction.normalized();
    add(th, 0.5 * a.mass);
    add(-th, 0.5 * a.mass);
  }
  if (density) {
    const auto& v = density->values;
    require(v.size() >= 4 && v.size() % 2 == 0, "density table needs an even number of samples");
    DensityTable s{v};
    size_t half = v.size() / 2;
    for (size_t i = 0; i < v.size(); ++i) {
      require(v[i] >= 0, "density values must be nonnegative");
      s.values[i] = 0.5 * (v[i] + v[(i + half) % v.size()]);
    }
    out.density = s;
  }
  out.symmetrized = true;
  return out;
}

double SphericalMeasure::density_at(double phi) const { return density ? (*density)(phi) : 0.0; }

double SphericalMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.mass;
  if (density) {
    // piecewise linear and periodic: the trapezoid rule is exact
    double s = 0.0;
    for (double v : density->values) s += v;
    m += s * 2 * pi / density->values.size();
  }
  return m;
}

double ModulationSchedule::at(double t) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  return values[it - breakpoints.begin()];
}

double ModulationSchedule::lower() const { return *std::min_element(values.begin(), values.end()); }
double ModulationSchedule::upper() const { return *std::max_element(values.begin(), values.end()); }

namespace {

void check_modulation(const ModulationSchedule& m) {
  require(m.values.size() == m.breakpoints.size() + 1, "modulation: values = breakpoints + 1");
  require(std::is_sorted(m.breakpoints.begin(), m.breakpoints.end()),
          "modulation: breakpoints must increase");
  for (double v : m.values) require(v > 0 && std::isfinite(v), "modulation must be positive");
}

// integral of mu(phi) g(phi) over the circle, split where either factor kinks
double angular(const SphericalMeasure& mu, const std::function<double(double)>& g) {
  std::vector<double> cuts;
  for (int k = 0; k <= 8; ++k) cuts.push_back(k * pi / 4);
  if (mu.density) {
    int n = static_cast<int>(mu.density->values.size());
    for (int k = 0; k < n; ++k) cuts.push_back(2 * pi * k / n);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             cuts.end());
  double s = 0.0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k)
    s += quad::gauss([&](double p) { return mu.density_at(p) * g(p); }, cuts[k], cuts[k + 1],
                     20);
  return s;
}

// distance from 0 to the boundary of [-1/2,1/2]^2 along angle phi
double half_square_ray(double phi) {
  return 0.5 / std::max(std::abs(std::cos(phi)), std::abs(std::sin(phi)));
}

bool lattice_direction(const Eigen::Vector2d& th, int dim, Eigen::Vector2i& pq) {
  if (dim == 1) {
    pq = Eigen::Vector2i(1, 0);
    return true;
  }
  for (int s = 1; s <= 16; ++s)
    for (int p = -s; p <= s; ++p)
      for (int q = -s; q <= s; ++q) {
        if (std::max(std::abs(p), std::abs(q)) != s || std::gcd(p, q) != 1) continue;
        Eigen::Vector2d v(p, q);
        if (std::abs(th.x() * v.y() - th.y() * v.x()) < 1e-12 * v.norm() && th.dot(v) > 0) {
          pq = Eigen::Vector2i(p, q);
          return true;
        }
      }
  return false;
}

bool canonical(const Eigen::Vector2d& th, int dim) {
  if (dim == 1) return th.x() > 0;
  return th.x() > 1e-14 || (std::abs(th.x()) <= 1e-14 && th.y() > 0);
}

struct KernelBuilder {
  std::map<std::pair<int, int>, double> w;
  double tail = 0.0, total = 0.0;
  void add_pair(const Eigen::Vector2i& o, double v) {
    w[{o.x(), o.y()}] += v;
    w[{-o.x(), -o.y()}] += v;
  }
};

void add_lines(KernelBuilder& kb, const SphericalMeasure& mu, double alpha, const Grid& grid) {
  const Eigen::Vector2i ext = grid.extent();
  const double ssum = line_weight_sum(alpha);
  for (const auto& a : mu.atoms) {
    if (a.mass == 0 || !canonical(a.direction, mu.dim)) continue;
    Eigen::Vector2i pq;
    if (!lattice_direction(a.direction, mu.dim, pq))
      throw PreconditionError("atom direction is not a lattice direction");
    double step = grid.h * Eigen::Vector2d(pq.x(), pq.y()).norm();
    double scale = a.mass * std::pow(step, -alpha);
    long kl = 1 << 30;
    for (int c = 0; c < mu.dim; ++c)
      if (pq[c] != 0) kl = std::min<long>(kl, ext[c] / std::abs(pq[c]));
    for (long k = 1; k <= kl; ++k)
      kb.add_pair(static_cast<int>(k) * pq, scale * line_weight(alpha, k));
    kb.tail += 2 * scale * line_weight_tail(alpha, kl);
    kb.total += 2 * scale * ssum;
  }
}

void add_density(KernelBuilder& kb, const SphericalMeasure& mu, double alpha, const Grid& grid) {
  const int R = grid.extent().maxCoeff();
  const double hs = std::pow(grid.h, -alpha);
  auto k = [&](double x, double y) {
    return mu.density_at(std::atan2(y, x)) * std::pow(x * x + y * y, -1.0 - 0.5 * alpha);
  };
  // canonical half plane; the other half follows from mu(phi) = mu(phi + pi)
  std::vector<Eigen::Vector2i> half;
  for (int j = 0; j <= R; ++j)
    for (int i = -R; i <= R; ++i)
      if (j > 0 || i > 0) half.emplace_back(i, j);
  std::vector<double> wt(half.size());
  unsigned nt = std::max(1u, std::min(16u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (size_t c = t; c < half.size(); c += nt) {
        const auto& y = half[c];
        wt[c] = quad::adaptive_rect(k, y.x() - 0.5, y.x() + 0.5, y.y() - 0.5, y.y() + 0.5,
                                    1e-12, 8);
      }
    });
  for (auto& th : pool) th.join();
  const double inv_a = 1.0 / alpha, inv2a = 1.0 / (2.0 - alpha);
  double m11 = angular(mu, [&](double p) {
    return std::pow(std::cos(p), 2) * std::pow(half_square_ray(p), 2 - alpha) * inv2a;
  });
  double m22 = angular(mu, [&](double p) {
    return std::pow(std::sin(p), 2) * std::pow(half_square_ray(p), 2 - alpha) * inv2a;
  });
  double outside = angular(mu, [&](double p) { return std::pow(half_square_ray(p), -alpha) * inv_a; });
  for (size_t c = 0; c < half.size(); ++c) {
    double v = wt[c];
    if (half[c] == Eigen::Vector2i(1, 0)) v += 0.5 * m11;
    if (half[c] == Eigen::Vector2i(0, 1)) v += 0.5 * m22;
    kb.add_pair(half[c], hs * v);
  }
  kb.tail += hs * std::pow(2.0 * R + 1.0, -alpha) * outside;
  kb.total += hs * (outside + m11 + m22);
}

}  // namespace

NondegeneracyReport nondegeneracy_constant(const SphericalMeasure& mu, double alpha) {
  require(alpha > 0 && alpha < 2, "alpha must lie in (0,2)");
  NondegeneracyReport r;
  const double lam1 = mu.total_mass();
  if (mu.dim == 1) {
    r.value = lam1;
  } else {
    const int net = 720;
    r.value = std::numeric_limits<double>::infinity();
    for (int j = 0; j < net; ++j) {
      double psi = 2 * pi * j / net;
      Eigen::Vector2d rho(std::cos(psi), std::sin(psi));
      double s = 0.0;
      for (const auto& a : mu.atoms) s += a.mass * std::pow(std::abs(rho.dot(a.direction)), alpha);
      if (mu.density)
        for (int i = 0; i < net; ++i) {
          double phi = 2 * pi * i / net;
          s += mu.density_at(phi) * std::pow(std::abs(std::cos(phi - psi)), alpha) * 2 * pi / net;
        }
      if (s < r.value) {
        r.value = s;
        r.direction = psi;
      }
    }
  }
  r.degenerate = !(lam1 > 0) || r.value < kDegenerateTolerance * lam1;
  return r;
}

OperatorMatrix assemble_operator(const StableOperatorSpec& spec, const Grid& grid) {
  const double alpha = spec.alpha;
  require(alpha > 0 && alpha < 2, "assemble_operator: alpha must lie in (0,2)");
  require(spec.spherical.dim == grid.dim(), "assemble_operator: dimension mismatch");
  check_modulation(spec.modulation);
  SphericalMeasure mu = spec.spherical.symmetrized ? spec.spherical : spec.spherical.symmetrize();
  require(!nondegeneracy_constant(mu, alpha).degenerate, "assemble_operator: degenerate measure");
  require(grid.dim() == 2 || !mu.density, "density tables need d = 2");

  KernelBuilder kb;
  add_lines(kb, mu, alpha, grid);
  if (mu.density) add_density(kb, mu, alpha, grid);

  OperatorMatrix A;
  A.alpha = alpha;
  A.modulation = spec.modulation;
  A.interior_size = grid.size();
  A.kernel.tail = kb.tail;
  A.kernel.total = kb.total;
  for (const auto& [o, v] : kb.w) A.kernel.entries.emplace_back(Eigen::Vector2i(o.first, o.second), v);

  const Eigen::Vector2i ext = grid.extent();
  const int wx = 2 * ext.x() + 1, wy = 2 * ext.y() + 1;
  std::vector<double> dense(static_cast<size_t>(wx) * wy, 0.0);
  for (const auto& [o, v] : A.kernel.entries)
    if (std::abs(o.x()) <= ext.x() && std::abs(o.y()) <= ext.y())
      dense[(o.y() + ext.y()) * wx + (o.x() + ext.x())] = v;

  const int n = grid.size();
  A.entries.resize(n, n);
  Eigen::MatrixXi lat = grid.lattice;
  if (grid.dim() == 1) lat.conservativeResize(2, n), lat.row(1).setZero();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      int ox = lat(0, j) - lat(0, i), oy = lat(1, j) - lat(1, i);
      A.entries(i, j) = dense[(oy + ext.y()) * wx + (ox + ext.x())];
    }
  A.tail_diagonal.resize(n);
  for (int i = 0; i < n; ++i) {
    A.entries(i, i) = -kb.total;
    double off = A.entries.row(i).sum() + kb.total;
    A.tail_diagonal[i] = kb.total - off;
  }
  return A;
}

DirichletFormReport dirichlet_form(const OperatorMatrix& A, const Grid& grid, const Vector& u,
                                   const Vector& v) {
  require(u.size() == A.interior_size && v.size() == A.interior_size,
          "dirichlet_form: dimension mismatch");
  DirichletFormReport r;
  r.matrix_value = u.dot(A.entries * v);

  int R = 0, Ry = 0;
  for (const auto& [o, w] : A.kernel.entries) {
    R = std::max(R, std::abs(o.x()));
    Ry = std::max(Ry, std::abs(o.y()));
  }
  auto val = [&](const Vector& f, int i, int j) {
    int k = grid.node_at(i, j);
    return k >= 0 ? f[k] : 0.0;
  };
  const bool two = grid.dim() == 2;
  long double acc = 0.0L;
  for (int j = grid.box_lo.y() - (two ? Ry : 0); j <= grid.box_hi.y() + (two ? Ry : 0); ++j)
    for (int i = grid.box_lo.x() - R; i <= grid.box_hi.x() + R; ++i) {
      double ux = val(u, i, j), vx = val(v, i, j);
      long double row = 0.0L;
      for (const auto& [o, w] : A.kernel.entries) {
        double du = val(u, i + o.x(), j + o.y()) - ux;
        if (du == 0.0) continue;
        row += static_cast<long double>(w) * du * (val(v, i + o.x(), j + o.y()) - vx);
      }
      acc += row;
    }
  r.lattice_value = static_cast<double>(-0.5L * acc) - A.kernel.tail * u.dot(v);
  return r;
}

double fractional_laplacian_constant(int d, double alpha) {
  return alpha * std::pow(2.0, alpha - 1) * std::tgamma(0.5 * (d + alpha)) /
         (std::pow(pi, 0.5 * d) * std::tgamma(1 - 0.5 * alpha));
}

double getoor_constant(int d, double alpha) {
  return std::pow(2.0, alpha) * std::tgamma(0.5 * alpha + 1) * std::tgamma(0.5 * (d + alpha)) /
         std::tgamma(0.5 * d);
}

double getoor_ball_solution(double alpha, int d, double r) {
  require(std::abs(r) <= 1.0, "getoor_ball_solution: |x| <= 1");
  return std::pow(1 - r * r, 0.5 * alpha) / getoor_constant(d, alpha);
}

// Weighted trapezoid on psi(s) = delta^2 u(s h)/s^g against s^{g-1-alpha} with
// g = 1 + alpha/2, psi(0) = 0.
double line_weight(double alpha, long k) {
  const double g = 1 + 0.5 * alpha, b = g - alpha;
  double kk = static_cast<double>(k);
  return std::pow(kk, -g) * (std::pow(kk + 1, b) - std::pow(kk - 1, b)) / (2 * b);
}

double line_weight_tail(double alpha, long K) {
  const long K0 = 2000;
  if (K < K0) {
    double s = 0.0;
    for (long k = K0; k > K; --k) s += line_weight(alpha, k);
    return s + line_weight_tail(alpha, K0);
  }
  // c_k = k^{-1-alpha} sum_m b_m k^{-2m}, b_m = binom(b, 2m+1)/b
  const double b = 1 - 0.5 * alpha;
  double coef = 1.0, s = 0.0;
  for (int m = 0; m < 4; ++m) {
    s += coef * quad::power_tail(1 + alpha + 2 * m, K);
    coef *= (b - (2 * m + 1)) * (b - (2 * m + 2)) / ((2 * m + 2) * (2 * m + 3));
  }
  return s;
}

double line_weight_sum(double alpha) {
  return line_weight_tail(alpha, 0);
}

}  // namespace nlspde

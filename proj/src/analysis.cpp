#include "nlspde/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace nlspde {

namespace {

double pw(double x, double p) { return p == 2.0 ? x * x : std::pow(x, p); }

// sum |v_i|^p d_i^{theta-d} h^d, before the 1/p power
double weighted_sum(const Vector& v, double p, double theta, const Grid& grid) {
  const double e = theta - grid.dim();
  double s = 0.0;
  for (int i = 0; i < grid.size(); ++i)
    if (v[i] != 0.0) s += pw(std::abs(v[i]), p) * std::pow(grid.dist[i], e);
  return s * grid.cell_volume();
}

Vector psi_power(const Grid& grid, double w) {
  return grid.dist.array().pow(w).matrix();
}

// Weighted L_p(D x [0,T]) of one path, p-th power; trapezoid in time.
double time_sum(const std::vector<double>& t, const Matrix& v, const Vector& scale, double p,
                double theta, const Grid& grid) {
  double s = 0.0, prev = 0.0;
  for (int k = 0; k < v.cols(); ++k) {
    double cur = weighted_sum(v.col(k).cwiseProduct(scale), p, theta, grid);
    if (k > 0) s += 0.5 * (t[k] - t[k - 1]) * (cur + prev);
    prev = cur;
  }
  return s;
}

}  // namespace

double weighted_lp_norm(const Vector& u, double p, double theta, const Grid& grid) {
  require(p >= 1, "weighted_lp_norm: p must be at least 1");
  require(u.size() == grid.size(), "weighted_lp_norm: field does not match the grid");
  return std::pow(weighted_sum(u, p, theta, grid), 1.0 / p);
}

Matrix grid_gradient(const Vector& u, const Grid& grid) {
  require(u.size() == grid.size(), "grid_gradient: field does not match the grid");
  const int dim = grid.dim();
  Matrix D = Matrix::Zero(dim, grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    for (int a = 0; a < dim; ++a) {
      int i = grid.lattice(0, k), j = dim == 2 ? grid.lattice(1, k) : 0;
      int lo = a == 0 ? grid.node_at(i - 1, j) : grid.node_at(i, j - 1);
      int hi = a == 0 ? grid.node_at(i + 1, j) : grid.node_at(i, j + 1);
      if (lo >= 0 && hi >= 0)
        D(a, k) = (u[hi] - u[lo]) / (2 * grid.h);
      else if (hi >= 0)
        D(a, k) = (u[hi] - u[k]) / grid.h;
      else if (lo >= 0)
        D(a, k) = (u[k] - u[lo]) / grid.h;
    }
  }
  return D;
}

double weighted_sobolev_norm(const Vector& u, int n, double p, double theta, const Grid& grid) {
  require(n == 0 || n == 1, "weighted_sobolev_norm: order must be 0 or 1");
  require(p >= 1, "weighted_sobolev_norm: p must be at least 1");
  require(u.size() == grid.size(), "weighted_sobolev_norm: field does not match the grid");
  double s = weighted_sum(u, p, theta, grid);
  if (n == 1) {
    Matrix D = grid_gradient(u, grid);
    for (int a = 0; a < grid.dim(); ++a)
      s += weighted_sum(D.row(a).transpose().cwiseProduct(grid.dist), p, theta, grid);
  }
  return std::pow(s, 1.0 / p);
}

double field_norm(const Vector& u, const NormSpec& spec, const Grid& grid) {
  if (spec.weight_shift == 0.0) return weighted_sobolev_norm(u, spec.order, spec.p, spec.theta, grid);
  return weighted_sobolev_norm(u.cwiseProduct(psi_power(grid, spec.weight_shift)), spec.order, spec.p,
                               spec.theta, grid);
}

double dyadic_layer_norm(const Vector& u, double p, double theta, const Grid& grid) {
  require(u.size() == grid.size(), "dyadic_layer_norm: field does not match the grid");
  // zeta_{-n} lives where d is about e^n; after the change of variables
  // ||zeta_{-n}(e^n .) u(e^n .)||_p^p = e^{-nd} sum |zeta_{-n} u|^p h^d
  const int d = grid.dim();
  const double dmin = grid.dist.minCoeff(), dmax = grid.dist.maxCoeff();
  const int nlo = static_cast<int>(std::floor(std::log(dmin))) - 2;
  const int nhi = static_cast<int>(std::ceil(std::log(dmax))) + 2;
  double total = 0.0;
  for (int n = nlo; n <= nhi; ++n) {
    double s = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      double z = zeta_of_distance(-n, grid.dist[i]);
      if (z > 0 && u[i] != 0.0) s += pw(z * std::abs(u[i]), p);
    }
    total += std::exp(n * (theta - d)) * s * grid.cell_volume();
  }
  return std::pow(total, 1.0 / p);
}

SolutionNorm solution_space_norm(const std::vector<PathFields>& paths, const Vector& u0,
                                 const SolutionNormParams& params, const Grid& grid) {
  require(u0.size() == grid.size(), "solution_space_norm: u0 does not match the grid");
  const double p = params.p, th = params.theta, a = params.alpha;
  SolutionNorm out;
  out.u0 = weighted_lp_norm(u0.cwiseProduct(psi_power(grid, -0.5 * a + a / p)), p, th, grid);
  if (paths.empty()) return out;
  const Vector su = psi_power(grid, -0.5 * a), sf = psi_power(grid, 0.5 * a), one = Vector::Ones(grid.size());
  double pu = 0, pf = 0, pg = 0;
  for (const auto& path : paths) {
    require(path.u.rows() == grid.size() && path.u.cols() == static_cast<long>(path.times.size()),
            "solution_space_norm: trajectory shape mismatch");
    require(path.du.rows() == path.u.rows() && path.du.cols() == path.u.cols() &&
                path.su.rows() == path.u.rows() && path.su.cols() == path.u.cols(),
            "solution_space_norm: components differ in shape");
    pu += time_sum(path.times, path.u, su, p, th, grid);
    pf += time_sum(path.times, path.du, sf, p, th, grid);
    pg += time_sum(path.times, path.su, one, p, th, grid);
  }
  const double P = static_cast<double>(paths.size());
  out.u = std::pow(pu / P, 1.0 / p);
  out.f = std::pow(pf / P, 1.0 / p);
  out.g = std::pow(pg / P, 1.0 / p);
  return out;
}

PathFields path_fields(const Problem& prob, const Trajectory& traj) {
  const int n = prob.grid.size(), N = static_cast<int>(traj.fields.cols());
  PathFields pf;
  pf.times = traj.times;
  pf.u = traj.fields;
  pf.du = Matrix::Zero(n, N);
  pf.su = Matrix::Zero(n, N);
  Vector intensity = Vector::Zero(n);
  if (prob.noise) intensity = prob.noise->C.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (int k = 0; k < N; ++k) {
    const double t = traj.times[k];
    for (int i = 0; i < n; ++i) {
      const Point x = prob.grid.node(i);
      const double u = traj.fields(i, k);
      if (prob.drift) pf.du(i, k) = prob.drift(t, x, u);
      double s2 = 0.0;
      if (prob.noise && prob.amplitude) s2 += pw(prob.amplitude(t, x, u) * intensity[i], 2);
      for (const auto& g : prob.sequence) s2 += pw(g(t, x, u), 2);
      pf.su(i, k) = std::sqrt(s2);
    }
  }
  return pf;
}

DecayFit boundary_decay_exponent(const Vector& u, const Grid& grid) {
  require(u.size() == grid.size(), "boundary_decay_exponent: field does not match the grid");
  const double lo = 2 * grid.h, hi = 0.1 * grid.domain.diameter();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i < grid.size(); ++i) {
    const double d = grid.dist[i];
    if (d <= lo || d >= hi) continue;
    require(u[i] > 0, "boundary_decay_exponent: field is not positive on the boundary strip");
    const double x = std::log(d), y = std::log(u[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++n;
  }
  require(n >= 4, "boundary_decay_exponent: too few nodes in the boundary strip");
  DecayFit fit;
  const double den = n * sxx - sx * sx;
  require(den > 0, "boundary_decay_exponent: strip nodes share one distance");
  fit.exponent = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.exponent * sx) / n;
  fit.nodes = n;
  return fit;
}

HolderFit time_holder_exponent(const std::vector<Trajectory>& paths, const NormSpec& spec,
                               const Grid& grid) {
  require(!paths.empty(), "time_holder_exponent: no trajectories");
  const long cols = paths.front().fields.cols();
  require(cols - 1 >= 64, "time_holder_exponent: needs at least 64 time steps");
  const double dt = paths.front().times[1] - paths.front().times[0];
  HolderFit fit;
  double scale = 0.0;
  for (const auto& tr : paths) {
    require(tr.fields.cols() == cols, "time_holder_exponent: trajectories differ in length");
    scale = std::max(scale, tr.fields.cwiseAbs().maxCoeff());
  }
  // lags 1, 2, 4, ... up to a quarter of the horizon
  for (long lag = 1; 4 * lag <= cols - 1; lag *= 2) {
    double s = 0.0;
    long count = 0;
    for (const auto& tr : paths)
      for (long k = 0; k + lag < cols; ++k) {
        s += field_norm(tr.fields.col(k + lag) - tr.fields.col(k), spec, grid);
        ++count;
      }
    fit.lags.push_back(lag * dt);
    fit.increments.push_back(s / count);
  }
  const double biggest = *std::max_element(fit.increments.begin(), fit.increments.end());
  if (!(biggest > 1e-13 * std::max(scale, 1e-300))) {
    fit.degenerate = true;
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t k = 0; k < fit.lags.size(); ++k) {
    if (!(fit.increments[k] > 0)) continue;
    const double x = std::log(fit.lags[k]), y = std::log(fit.increments[k]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++n;
  }
  if (n < 2) {
    fit.degenerate = true;
    return fit;
  }
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

}  // namespace nlspde

#include "nlspde/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace nlspde::quad {

const Rule& gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: n >= 1");
  static std::array<std::atomic<const Rule*>, 129> fast{};
  if (n < 129)
    if (const Rule* r = fast[n].load(std::memory_order_acquire)) return *r;
  static std::map<int, Rule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Matrix J = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  Rule r;
  r.nodes = es.eigenvalues();
  r.weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  const Rule& out = cache.emplace(n, std::move(r)).first->second;
  if (n < 129) fast[n].store(&out, std::memory_order_release);
  return out;
}

double gauss(const Fn& f, double a, double b, int n) {
  const Rule& r = gauss_legendre(n);
  double c = 0.5 * (a + b), hw = 0.5 * (b - a), s = 0.0;
  for (int i = 0; i < n; ++i) s += r.weights[i] * f(c + hw * r.nodes[i]);
  return s * hw;
}

double composite_gauss(const Fn& f, double a, double b, int panels, int n) {
  double h = (b - a) / panels, s = 0.0;
  for (int k = 0; k < panels; ++k) s += gauss(f, a + k * h, a + (k + 1) * h, n);
  return s;
}

namespace {

double adapt(const Fn& f, double a, double b, double whole, double rel_tol,
             double abs_tol, int depth) {
  double m = 0.5 * (a + b);
  double l = gauss(f, a, m, 15), r = gauss(f, m, b, 15);
  double both = l + r;
  if (depth <= 0 || std::abs(both - whole) <= std::max(abs_tol, rel_tol * std::abs(both)))
    return both;
  return adapt(f, a, m, l, rel_tol, 0.5 * abs_tol, depth - 1) +
         adapt(f, m, b, r, rel_tol, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double adaptive(const Fn& f, double a, double b, double rel_tol, double abs_tol,
                int max_depth) {
  if (a == b) return 0.0;
  return adapt(f, a, b, gauss(f, a, b, 15), rel_tol, abs_tol, max_depth);
}

double tanh_sinh(const Fn& f, double a, double b, double rel_tol) {
  using std::numbers::pi;
  const double hw = 0.5 * (b - a);
  const double tmax = 6.0;
  auto term = [&](double t) {
    double u = 0.5 * pi * std::sinh(t);
    double ch = std::cosh(u);
    // distance from the nearer endpoint, computed without cancellation
    double delta = 1.0 / (std::exp(std::abs(u)) * ch);
    double x = u >= 0 ? b - hw * delta : a + hw * delta;
    if (x <= a || x >= b) return 0.0;
    double w = hw * 0.5 * pi * std::cosh(t) / (ch * ch);
    return w == 0.0 ? 0.0 : w * f(x);
  };
  double h = 0.5;
  double sum = term(0.0);
  for (double t = h; t <= tmax; t += h) sum += term(t) + term(-t);
  double est = sum * h;
  for (int level = 0; level < 12; ++level) {
    h *= 0.5;
    double add = 0.0;
    for (double t = h; t <= tmax; t += 2 * h) add += term(t) + term(-t);
    sum += add;
    double next = sum * h;
    if (level >= 2 && std::abs(next - est) <= rel_tol * std::abs(next)) return next;
    est = next;
  }
  return est;
}

double semi_infinite(const Fn& f, double a, double rel_tol) {
  using std::numbers::pi;
  auto term = [&](double t) {
    double e = std::exp(0.5 * pi * std::sinh(t));
    if (!std::isfinite(e) || e == 0.0) return 0.0;
    double w = 0.5 * pi * std::cosh(t) * e;
    double v = f(a + e);
    return v == 0.0 ? 0.0 : w * v;
  };
  const double tmax = 4.5;
  double h = 0.5;
  double sum = term(0.0);
  for (double t = h; t <= tmax; t += h) sum += term(t) + term(-t);
  double est = sum * h;
  for (int level = 0; level < 12; ++level) {
    h *= 0.5;
    double add = 0.0;
    for (double t = h; t <= tmax; t += 2 * h) add += term(t) + term(-t);
    sum += add;
    double next = sum * h;
    if (level >= 2 && std::abs(next - est) <= rel_tol * std::abs(next)) return next;
    est = next;
  }
  return est;
}

namespace {

double gauss_rect(const Fn2& f, double x0, double x1, double y0, double y1) {
  const Rule& r = gauss_legendre(8);
  double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
  double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
  double s = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      s += r.weights[i] * r.weights[j] * f(cx + hx * r.nodes[i], cy + hy * r.nodes[j]);
  return s * hx * hy;
}

double adapt_rect(const Fn2& f, double x0, double x1, double y0, double y1,
                  double whole, double rel_tol, int depth) {
  double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  double q[4] = {gauss_rect(f, x0, xm, y0, ym), gauss_rect(f, xm, x1, y0, ym),
                 gauss_rect(f, x0, xm, ym, y1), gauss_rect(f, xm, x1, ym, y1)};
  double all = q[0] + q[1] + q[2] + q[3];
  if (depth <= 0 || std::abs(all - whole) <= rel_tol * std::abs(all)) return all;
  return adapt_rect(f, x0, xm, y0, ym, q[0], rel_tol, depth - 1) +
         adapt_rect(f, xm, x1, y0, ym, q[1], rel_tol, depth - 1) +
         adapt_rect(f, x0, xm, ym, y1, q[2], rel_tol, depth - 1) +
         adapt_rect(f, xm, x1, ym, y1, q[3], rel_tol, depth - 1);
}

}  // namespace

double adaptive_rect(const Fn2& f, double x0, double x1, double y0, double y1,
                     double rel_tol, int max_depth) {
  return adapt_rect(f, x0, x1, y0, y1, gauss_rect(f, x0, x1, y0, y1), rel_tol,
                    max_depth);
}

double power_tail(double p, long K) {
  require(p > 1.0, "power_tail: p > 1");
  double N = static_cast<double>(K + 1);
  double np = std::pow(N, -p);
  return N * np / (p - 1.0) + 0.5 * np + p * np / N / 12.0 -
         p * (p + 1) * (p + 2) * np / (N * N * N) / 720.0 +
         p * (p + 1) * (p + 2) * (p + 3) * (p + 4) * np / std::pow(N, 5) / 30240.0;
}

double riemann_zeta(double p) {
  double s = 0.0;
  for (long k = 1; k <= 40; ++k) s += std::pow(static_cast<double>(k), -p);
  return s + power_tail(p, 40);
}

}  // namespace nlspde::quad

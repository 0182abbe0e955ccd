#include "nlspde/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "nlspde/quadrature.hpp"

namespace nlspde {

DomainSpec DomainSpec::interval(double a, double b) {
  require(a < b, "interval requires a < b");
  DomainSpec d;
  d.kind = DomainKind::interval;
  d.a = a;
  d.b = b;
  return d;
}

DomainSpec DomainSpec::disk(const Eigen::Vector2d& c, double r) {
  require(r > 0, "disk requires radius > 0");
  DomainSpec d;
  d.kind = DomainKind::disk;
  d.center = c;
  d.r_out = r;
  return d;
}

DomainSpec DomainSpec::annulus(const Eigen::Vector2d& c, double r_in, double r_out) {
  require(0 < r_in && r_in < r_out, "annulus requires 0 < r_in < r_out");
  DomainSpec d;
  d.kind = DomainKind::annulus;
  d.center = c;
  d.r_in = r_in;
  d.r_out = r_out;
  return d;
}

double DomainSpec::diameter() const {
  return kind == DomainKind::interval ? b - a : 2.0 * r_out;
}

double DomainSpec::inradius() const {
  switch (kind) {
    case DomainKind::interval: return 0.5 * (b - a);
    case DomainKind::disk: return r_out;
    case DomainKind::annulus: return 0.5 * (r_out - r_in);
  }
  return 0.0;
}

std::string DomainSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case DomainKind::interval: os << "interval(" << a << "," << b << ")"; break;
    case DomainKind::disk:
      os << "disk((" << center.x() << "," << center.y() << ")," << r_out << ")";
      break;
    case DomainKind::annulus:
      os << "annulus((" << center.x() << "," << center.y() << ")," << r_in << "," << r_out
         << ")";
      break;
  }
  return os.str();
}

double distance(const DomainSpec& dom, const Point& x) {
  switch (dom.kind) {
    case DomainKind::interval: {
      double d = std::min(x[0] - dom.a, dom.b - x[0]);
      return d > 0 ? d : 0.0;
    }
    case DomainKind::disk: {
      double d = dom.r_out - (x.head<2>() - dom.center).norm();
      return d > 0 ? d : 0.0;
    }
    case DomainKind::annulus: {
      double r = (x.head<2>() - dom.center).norm();
      double d = std::min(r - dom.r_in, dom.r_out - r);
      return d > 0 ? d : 0.0;
    }
  }
  return 0.0;
}

namespace {

double bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

}  // namespace

double regularized_distance(const DomainSpec& dom, const Point& x) {
  double dx = distance(dom, x);
  require(dx > 0, "regularized_distance: x must lie in D");
  double eps = 0.25 * dx;
  const auto& g = quad::gauss_legendre(24);
  double num = 0.0, den = 0.0;
  if (dom.dim() == 1) {
    for (int i = 0; i < g.nodes.size(); ++i) {
      double z = g.nodes[i], w = g.weights[i] * bump(z * z);
      num += w * distance(dom, point1(x[0] + eps * z));
      den += w;
    }
  } else {
    const int na = 48;
    for (int i = 0; i < g.nodes.size(); ++i) {
      double r = 0.5 * (g.nodes[i] + 1.0);
      double wr = 0.5 * g.weights[i] * r * bump(r * r);
      for (int k = 0; k < na; ++k) {
        double phi = 2.0 * std::numbers::pi * k / na;
        num += wr * distance(dom, point2(x[0] + eps * r * std::cos(phi),
                                         x[1] + eps * r * std::sin(phi)));
        den += wr;
      }
    }
  }
  return num / den;
}

double smooth_step(double s) {
  auto f = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
  double l = f(s + 0.5), r = f(0.5 - s);
  return l / (l + r);
}

double zeta_of_distance(int n, double dx) {
  if (!(dx > 0)) return 0.0;
  double s = n + std::log(dx);
  if (s <= -0.5 || s >= 1.5) return 0.0;
  return smooth_step(s) - smooth_step(s - 1.0);
}

double zeta_layer(const DomainSpec& dom, int n, const Point& x) {
  return zeta_of_distance(n, distance(dom, x));
}

int zeta_n0(const DomainSpec& dom) {
  // zeta_{-n} vanishes once e^{n-1/2} >= sup d_x
  return static_cast<int>(std::ceil(std::log(dom.inradius()) + 0.5));
}

Point Grid::position(int i, int j) const {
  double s = shift();
  if (dim() == 1) return point1(origin.x() + (i + s) * h);
  return point2(origin.x() + (i + s) * h, origin.y() + (j + s) * h);
}

int Grid::node_at(int i, int j) const {
  if (i < box_lo.x() || i > box_hi.x()) return -1;
  if (dim() == 1) return lookup[i - box_lo.x()];
  if (j < box_lo.y() || j > box_hi.y()) return -1;
  int nx = box_hi.x() - box_lo.x() + 1;
  return lookup[(j - box_lo.y()) * nx + (i - box_lo.x())];
}

Eigen::Vector2i Grid::extent() const {
  Eigen::Vector2i e = Eigen::Vector2i::Zero();
  for (int a = 0; a < dim(); ++a)
    e[a] = lattice.row(a).maxCoeff() - lattice.row(a).minCoeff();
  return e;
}

Grid make_grid(const DomainSpec& dom, double h, GridAnchor anchor) {
  require(h > 0 && std::isfinite(h), "make_grid: h must be positive");
  Grid g;
  g.domain = dom;
  g.h = h;
  g.anchor = anchor;
  const int d = dom.dim();
  double s = g.shift();
  Eigen::Vector2i lo, hi;
  if (d == 1) {
    g.origin = Eigen::Vector2d(dom.a, 0.0);
    lo = Eigen::Vector2i(-1, 0);
    hi = Eigen::Vector2i(static_cast<int>(std::ceil((dom.b - dom.a) / h)) + 1, 0);
  } else {
    g.origin = dom.center;
    int k = static_cast<int>(std::ceil(dom.r_out / h)) + 1;
    lo = Eigen::Vector2i(-k - 1, -k - 1);
    hi = Eigen::Vector2i(k, k);
  }
  require((hi - lo).maxCoeff() < 40000, "make_grid: h too small for the domain");
  std::vector<std::pair<Eigen::Vector2i, Point>> inside;
  for (int j = lo.y(); j <= hi.y(); ++j)
    for (int i = lo.x(); i <= hi.x(); ++i) {
      Point x = d == 1 ? point1(g.origin.x() + (i + s) * h)
                       : point2(g.origin.x() + (i + s) * h, g.origin.y() + (j + s) * h);
      if (distance(dom, x) > 0) inside.emplace_back(Eigen::Vector2i(i, j), x);
    }
  require(inside.size() >= 8, "make_grid: fewer than 8 interior nodes");
  const int n = static_cast<int>(inside.size());
  g.nodes.resize(d, n);
  g.lattice.resize(d, n);
  g.dist.resize(n);
  Eigen::Vector2i blo = inside.front().first, bhi = blo;
  for (int k = 0; k < n; ++k) {
    g.nodes.col(k) = inside[k].second;
    g.lattice.col(k) = inside[k].first.head(d);
    g.dist[k] = distance(dom, inside[k].second);
    blo = blo.cwiseMin(inside[k].first);
    bhi = bhi.cwiseMax(inside[k].first);
  }
  g.box_lo = blo - Eigen::Vector2i::Ones();
  g.box_hi = bhi + Eigen::Vector2i::Ones();
  if (d == 1) g.box_lo.y() = g.box_hi.y() = 0;
  int nx = g.box_hi.x() - g.box_lo.x() + 1, ny = g.box_hi.y() - g.box_lo.y() + 1;
  g.lookup.assign(static_cast<size_t>(nx) * ny, -1);
  for (int k = 0; k < n; ++k) {
    const auto& c = inside[k].first;
    g.lookup[(c.y() - g.box_lo.y()) * nx + (c.x() - g.box_lo.x())] = k;
  }
  g.exterior_band = nx * ny - n;
  return g;
}

WeightField make_weight_field(const Grid& grid) {
  WeightField w;
  w.psi = grid.dist;
  w.psi_tilde.resize(grid.size());
  w.equivalence = 1.0;
  for (int k = 0; k < grid.size(); ++k) {
    w.psi_tilde[k] = regularized_distance(grid.domain, grid.node(k));
    double r = w.psi_tilde[k] / w.psi[k];
    w.equivalence = std::max({w.equivalence, r, 1.0 / r});
  }
  return w;
}

}  // namespace nlspde

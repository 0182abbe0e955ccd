#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "nlspde/types.hpp"

namespace nlspde {

enum class DomainKind { interval, disk, annulus };

struct DomainSpec {
  DomainKind kind = DomainKind::interval;
  double a = 0.0, b = 1.0;          // interval
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double r_in = 0.0, r_out = 1.0;   // disk uses r_out only

  static DomainSpec interval(double a, double b);
  static DomainSpec disk(const Eigen::Vector2d& c, double r);
  static DomainSpec annulus(const Eigen::Vector2d& c, double r_in, double r_out);

  int dim() const { return kind == DomainKind::interval ? 1 : 2; }
  bool convex() const { return kind != DomainKind::annulus; }
  double diameter() const;
  double inradius() const;
  std::string describe() const;
};

// d_x; zero outside the open set.
double distance(const DomainSpec& dom, const Point& x);

// d_x averaged over a ball of radius d_x/4 against a fixed bump.
double regularized_distance(const DomainSpec& dom, const Point& x);

// Worst-case ratio bound between regularized_distance and d_x.
constexpr double kRegularizedEquivalence = 4.0 / 3.0;

// Boundary layer cutoffs. Supported on e^{-n-1/2} < d_x < e^{-n+3/2}; they sum to 1.
constexpr double kZetaC1 = 0.60653065971263342;  // e^{-1/2}
constexpr double kZetaC2 = 4.4816890703380645;   // e^{3/2}

double smooth_step(double s);
double zeta_layer(const DomainSpec& dom, int n, const Point& x);
double zeta_of_distance(int n, double dx);
// Smallest n0 with zeta_{-n} == 0 on D for all n >= n0.
int zeta_n0(const DomainSpec& dom);

enum class GridAnchor {
  cell_centered,  // nodes at origin + (k + 1/2) h; the boundary is never a node
  vertex          // nodes at origin + k h
};

struct Grid {
  DomainSpec domain;
  double h = 0.0;
  GridAnchor anchor = GridAnchor::cell_centered;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  Matrix nodes;                // dim x n
  Eigen::MatrixXi lattice;     // dim x n integer coordinates
  Vector dist;                 // d_x per node
  // Lattice bounding box, padded by one cell; every lattice point in it is
  // tagged interior (node id) or exterior (-1).
  Eigen::Vector2i box_lo = Eigen::Vector2i::Zero(), box_hi = Eigen::Vector2i::Zero();
  std::vector<int> lookup;
  int exterior_band = 0;       // exterior lattice points in the padded box

  int dim() const { return domain.dim(); }
  int size() const { return static_cast<int>(nodes.cols()); }
  double cell_volume() const { return dim() == 1 ? h : h * h; }
  double shift() const { return anchor == GridAnchor::cell_centered ? 0.5 : 0.0; }
  Point position(int i, int j = 0) const;
  Point node(int k) const { return nodes.col(k); }
  // Node id at lattice coordinates, -1 when exterior or outside the box.
  int node_at(int i, int j = 0) const;
  // Largest lattice offset between two interior nodes, per axis.
  Eigen::Vector2i extent() const;
};

Grid make_grid(const DomainSpec& dom, double h,
               GridAnchor anchor = GridAnchor::cell_centered);

struct WeightField {
  Vector psi;
  Vector psi_tilde;
  double equivalence = 1.0;  // max over nodes of max(psi_tilde/d, d/psi_tilde)
};

WeightField make_weight_field(const Grid& grid);

}  // namespace nlspde

#pragma once

#include <functional>
#include <utility>

#include "nlspde/types.hpp"

namespace nlspde::quad {

// Nodes and weights on [-1, 1] from the Jacobi matrix (Golub-Welsch).
struct Rule {
  Vector nodes;
  Vector weights;
};

const Rule& gauss_legendre(int n);

using Fn = std::function<double(double)>;

double gauss(const Fn& f, double a, double b, int n = 20);

double composite_gauss(const Fn& f, double a, double b, int panels, int n = 20);

// Interval halving until a panel agrees with its two halves.
double adaptive(const Fn& f, double a, double b, double rel_tol = 1e-12,
                double abs_tol = 1e-300, int max_depth = 40);

// Double-exponential rule; tolerates integrable endpoint singularities.
double tanh_sinh(const Fn& f, double a, double b, double rel_tol = 1e-12);

// Integral over [a, inf) of f, via t = a + e^s with s in [log(eps), log(big)].
double semi_infinite(const Fn& f, double a, double rel_tol = 1e-12);

// 2D adaptive tensor Gauss over a rectangle.
using Fn2 = std::function<double(double, double)>;
double adaptive_rect(const Fn2& f, double x0, double x1, double y0, double y1,
                     double rel_tol = 1e-11, int max_depth = 12);

// Tail sum over k > K of k^{-p}, Euler-Maclaurin at K.
double power_tail(double p, long K);

double riemann_zeta(double p);

}  // namespace nlspde::quad

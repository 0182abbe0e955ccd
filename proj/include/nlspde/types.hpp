#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace nlspde {

// Points live in R^1 or R^2; fixed max storage keeps them on the stack.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Point point1(double x) {
  Point p(1);
  p << x;
  return p;
}

inline Point point2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

}  // namespace nlspde

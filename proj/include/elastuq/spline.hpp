#pragma once

#include <Eigen/Dense>

namespace elastuq {

// Bicubic interpolation of values given on the uniform grid (i/m, j/m),
// i, j = 0..m of the unit square. Interpolation uses cubic B-spline
// collocation; end conditions are symmetry closures per axis:
//   Odd  - data extends antisymmetrically (sine-like, zero at the ends)
//   Even - data extends symmetrically (cosine-like, zero slope at the ends)
// These closures are exact for the trigonometric grids they are applied to.
// Evaluation clamps arguments to [0,1].
class BicubicSpline {
public:
  enum class Axis { Odd, Even };

  BicubicSpline() = default;
  // values(i, j) = f(i/m, j/m); values is (m+1) x (m+1)
  BicubicSpline(const Eigen::MatrixXd& values, Axis ax1, Axis ax2);

  double operator()(double x1, double x2) const;
  // partial derivatives of the interpolant itself
  double d1(double x1, double x2) const;
  double d2(double x1, double x2) const;

  bool empty() const { return m_ == 0; }
  int grid_m() const { return m_; }

private:
  int m_ = 0;
  Eigen::MatrixXd c_;  // (m+3) x (m+3), ghost layer at both ends of each axis
};

}  // namespace elastuq

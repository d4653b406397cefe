#include "elastuq/spline.hpp"

#include <cmath>
#include <stdexcept>

namespace elastuq {

namespace {

// Solves the collocation system (c_{i-1} + 4 c_i + c_{i+1})/6 = f_i for
// i = 0..m with the ghost coefficients eliminated through the symmetry
// closure. Odd: c_{-1} = -c_1, c_{m+1} = -c_{m-1}. Even: c_{-1} = c_1,
// c_{m+1} = c_{m-1}. Thomas algorithm on the resulting tridiagonal system.
void solve_axis(Eigen::VectorXd& f, BicubicSpline::Axis ax) {
  const int n = static_cast<int>(f.size());  // m+1 unknowns
  const bool even = ax == BicubicSpline::Axis::Even;
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 4.0);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(n, 1.0);
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(n, 1.0);
  upper[0] = even ? 2.0 : 0.0;
  lower[n - 2] = even ? 2.0 : 0.0;
  Eigen::VectorXd rhs = 6.0 * f;

  for (int i = 1; i < n; ++i) {
    const double w = lower[i - 1] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  f[n - 1] = rhs[n - 1] / diag[n - 1];
  for (int i = n - 2; i >= 0; --i) f[i] = (rhs[i] - upper[i] * f[i + 1]) / diag[i];
}

inline void bspline_weights(double u, double w[4]) {
  const double u2 = u * u, u3 = u2 * u;
  w[0] = (1.0 - 3.0 * u + 3.0 * u2 - u3) / 6.0;
  w[1] = (4.0 - 6.0 * u2 + 3.0 * u3) / 6.0;
  w[2] = (1.0 + 3.0 * u + 3.0 * u2 - 3.0 * u3) / 6.0;
  w[3] = u3 / 6.0;
}

inline void bspline_dweights(double u, double w[4]) {
  const double u2 = u * u;
  w[0] = (-1.0 + 2.0 * u - u2) / 2.0;
  w[1] = (-4.0 * u + 3.0 * u2) / 2.0;
  w[2] = (1.0 + 2.0 * u - 3.0 * u2) / 2.0;
  w[3] = u2 / 2.0;
}

}  // namespace

BicubicSpline::BicubicSpline(const Eigen::MatrixXd& values, Axis ax1, Axis ax2) {
  if (values.rows() != values.cols() || values.rows() < 3)
    throw std::runtime_error("spline: values must be square, at least 3x3");
  m_ = static_cast<int>(values.rows()) - 1;

  Eigen::MatrixXd c = values;
  Eigen::VectorXd tmp;
  for (int j = 0; j <= m_; ++j) {  // along x1 for each column
    tmp = c.col(j);
    solve_axis(tmp, ax1);
    c.col(j) = tmp;
  }
  for (int i = 0; i <= m_; ++i) {  // along x2 for each row
    tmp = c.row(i).transpose();
    solve_axis(tmp, ax2);
    c.row(i) = tmp.transpose();
  }

  c_.resize(m_ + 3, m_ + 3);
  c_.block(1, 1, m_ + 1, m_ + 1) = c;
  const double s1 = ax1 == Axis::Odd ? -1.0 : 1.0;
  const double s2 = ax2 == Axis::Odd ? -1.0 : 1.0;
  for (int j = 1; j <= m_ + 1; ++j) {
    c_(0, j) = s1 * c_(2, j);
    c_(m_ + 2, j) = s1 * c_(m_, j);
  }
  for (int i = 0; i <= m_ + 2; ++i) {
    c_(i, 0) = s2 * c_(i, 2);
    c_(i, m_ + 2) = s2 * c_(i, m_);
  }
}

double BicubicSpline::operator()(double x1, double x2) const {
  const double t1 = std::fmin(std::fmax(x1, 0.0), 1.0) * m_;
  const double t2 = std::fmin(std::fmax(x2, 0.0), 1.0) * m_;
  int i = std::min(static_cast<int>(t1), m_ - 1);
  int j = std::min(static_cast<int>(t2), m_ - 1);
  double w1[4], w2[4];
  bspline_weights(t1 - i, w1);
  bspline_weights(t2 - j, w2);
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += c_(i + a, j + b) * w2[b];
    acc += w1[a] * row;
  }
  return acc;
}

double BicubicSpline::d1(double x1, double x2) const {
  const double t1 = std::fmin(std::fmax(x1, 0.0), 1.0) * m_;
  const double t2 = std::fmin(std::fmax(x2, 0.0), 1.0) * m_;
  int i = std::min(static_cast<int>(t1), m_ - 1);
  int j = std::min(static_cast<int>(t2), m_ - 1);
  double w1[4], w2[4];
  bspline_dweights(t1 - i, w1);
  bspline_weights(t2 - j, w2);
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += c_(i + a, j + b) * w2[b];
    acc += w1[a] * row;
  }
  return acc * m_;
}

double BicubicSpline::d2(double x1, double x2) const {
  const double t1 = std::fmin(std::fmax(x1, 0.0), 1.0) * m_;
  const double t2 = std::fmin(std::fmax(x2, 0.0), 1.0) * m_;
  int i = std::min(static_cast<int>(t1), m_ - 1);
  int j = std::min(static_cast<int>(t2), m_ - 1);
  double w1[4], w2[4];
  bspline_weights(t1 - i, w1);
  bspline_dweights(t2 - j, w2);
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += c_(i + a, j + b) * w2[b];
    acc += w1[a] * row;
  }
  return acc * m_;
}

}  // namespace elastuq

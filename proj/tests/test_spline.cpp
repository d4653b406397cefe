#include <doctest.h>

#include <cmath>

#include "elastuq/spline.hpp"

using namespace elastuq;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("spline interpolates the grid data exactly") {
  const int m = 16;
  Eigen::MatrixXd v(m + 1, m + 1);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      v(i, j) = std::sin(kPi * i / m) * std::sin(2.0 * kPi * j / m);
  const BicubicSpline s(v, BicubicSpline::Axis::Odd, BicubicSpline::Axis::Odd);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      CHECK(s(double(i) / m, double(j) / m) == doctest::Approx(v(i, j)).epsilon(1e-12));
}

TEST_CASE("odd closure converges at fourth order on sine data") {
  double prev = 0.0;
  for (int m : {16, 32}) {
    Eigen::MatrixXd v(m + 1, m + 1);
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j)
        v(i, j) = std::sin(3.0 * kPi * i / m) * std::sin(2.0 * kPi * j / m);
    const BicubicSpline s(v, BicubicSpline::Axis::Odd, BicubicSpline::Axis::Odd);
    double err = 0.0;
    for (int q = 0; q < 500; ++q) {
      const double x1 = (q * 0.618034 + 0.01) - std::floor(q * 0.618034 + 0.01);
      const double x2 = (q * 0.381966 + 0.02) - std::floor(q * 0.381966 + 0.02);
      err = std::max(err, std::abs(s(x1, x2) - std::sin(3.0 * kPi * x1) *
                                                    std::sin(2.0 * kPi * x2)));
    }
    if (prev > 0.0) CHECK(prev / err > 12.0);  // ~16 for h^4
    prev = err;
  }
}

TEST_CASE("even closure handles cosine data near the boundary") {
  const int m = 32;
  Eigen::MatrixXd v(m + 1, m + 1);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      v(i, j) = std::cos(2.0 * kPi * i / m) * std::sin(kPi * j / m);
  const BicubicSpline s(v, BicubicSpline::Axis::Even, BicubicSpline::Axis::Odd);
  for (double x1 : {0.0, 0.004, 0.996, 1.0})
    for (double x2 : {0.3, 0.7}) {
      const double exact = std::cos(2.0 * kPi * x1) * std::sin(kPi * x2);
      CHECK(s(x1, x2) == doctest::Approx(exact).epsilon(5e-5));
    }
}

TEST_CASE("spline derivatives approximate the data derivatives") {
  const int m = 64;
  Eigen::MatrixXd v(m + 1, m + 1);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      v(i, j) = std::sin(kPi * i / m) * std::sin(kPi * j / m);
  const BicubicSpline s(v, BicubicSpline::Axis::Odd, BicubicSpline::Axis::Odd);
  const double x1 = 0.371, x2 = 0.642;
  CHECK(s.d1(x1, x2) ==
        doctest::Approx(kPi * std::cos(kPi * x1) * std::sin(kPi * x2)).epsilon(1e-4));
  CHECK(s.d2(x1, x2) ==
        doctest::Approx(kPi * std::sin(kPi * x1) * std::cos(kPi * x2)).epsilon(1e-4));
}

TEST_CASE("evaluation clamps out-of-range arguments") {
  const int m = 8;
  Eigen::MatrixXd v = Eigen::MatrixXd::Ones(m + 1, m + 1);
  const BicubicSpline s(v, BicubicSpline::Axis::Even, BicubicSpline::Axis::Even);
  CHECK(s(-0.2, 0.5) == doctest::Approx(s(0.0, 0.5)).epsilon(1e-14));
  CHECK(s(0.5, 1.3) == doctest::Approx(s(0.5, 1.0)).epsilon(1e-14));
}

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "elastuq/spline.hpp"

namespace elastuq {

// M_alpha = zeta(2 alpha - 1) - zeta(2 alpha), the constant that normalizes
// the expansion coefficients so the perturbation stays within [-1/2, 1/2].
double zeta_normalizer(double alpha);

// Anti-diagonal enumeration of frequency pairs (k, l), k, l >= 1, walking
// each diagonal k + l = m with k descending:
//   (1,1) -> 1, (2,1) -> 2, (1,2) -> 3, (3,1) -> 4, (2,2) -> 5, ...
std::int64_t rho_index(std::int64_t k, std::int64_t l);
std::array<std::int64_t, 2> rho_inverse(std::int64_t j);

// sup norm of the j-th expansion function sin(k pi x1) sin(l pi x2) /
// (M_alpha (k+l)^(2 alpha))
double basis_sup_norm(std::int64_t j, double alpha);

// (1/2) * sum_{j > s} basis_sup_norm(j), an upper bound for the uniform
// truncation error of the perturbation series.
double coefficient_tail_bound(std::int64_t s, double alpha);

// Registry of closed-form deterministic coefficient parts with analytic
// gradients.
struct ClosedForm {
  std::string id;
  std::function<double(double, double)> value;
  std::function<std::array<double, 2>(double, double)> grad;
};
const ClosedForm& coefficient_form(const std::string& id);
std::vector<std::string> coefficient_form_ids();

// Description of the random Lame coefficient pair
//   mu(x; y)     = mu0(x) + sum_{j<=s_mu} y_j psi_j(x)
//   lambda(x; z) = Lambda * (lambda_hat0(x) + sum_{j<=s_lambda} z_j psi_j(x))
// with psi_j the normalized sine products above and y, z in [-1/2, 1/2]^s.
// The random parts live on the unit square.
struct FieldSpec {
  std::string mu0 = "one";
  std::string lambda_hat0 = "one";
  double Lambda = 1.0;
  double alpha = 2.0;
  int s_mu = 0;
  int s_lambda = 0;
  double mu_min = 0.5;          // declared uniform lower bound for mu
  double lambda_hat_min = 0.5;  // declared uniform lower bound for lambda_hat
  int grid_m = 256;             // value synthesis grid
  int grid_m_grad = 512;        // gradient synthesis grid
  double grad_warn_threshold = 0.0;  // advisory |grad mu| check, 0 disables
};

// Values of the truncated series S at the uniform grid (i/m, j/m), i, j=0..m.
struct SineGrid {
  int m = 0;
  Eigen::MatrixXd v;  // (m+1) x (m+1), row index follows x1
};

// Fast synthesis via discrete sine/cosine transforms. Throws ConfigError if
// any active frequency reaches the grid Nyquist limit (k or l >= m).
SineGrid eval_field_grid(std::span<const double> coeffs, double alpha, int m);
// Gradient components of S on the (finer) m-grid: {dS/dx1, dS/dx2}.
std::array<SineGrid, 2> eval_grad_grid(std::span<const double> coeffs, double alpha,
                                       int m);

// Direct summation reference path (serial; used as oracle and in benchmarks).
double eval_field_direct(std::span<const double> coeffs, double alpha, double x1,
                         double x2);
std::array<double, 2> eval_grad_direct(std::span<const double> coeffs, double alpha,
                                       double x1, double x2);

// One realization of the coefficient pair: grid synthesis plus bicubic
// interpolants, ready for pointwise evaluation inside assembly loops.
struct FieldSample {
  FieldSpec spec;
  std::vector<double> y, z;
  bool mu_random = false, lambda_random = false;

  BicubicSpline s_mu;                  // perturbation of mu
  BicubicSpline s_lambda;              // perturbation of lambda_hat
  BicubicSpline ds_mu_1, ds_mu_2;      // perturbation gradient components

  double mu_grid_min = 0.0;            // min of mu over the value grid
  double lambda_hat_grid_min = 0.0;    // min of lambda_hat over the value grid
  double grad_mu_grid_max = 0.0;       // max |grad S_mu| over the gradient grid
  bool bound_violation = false;
  std::vector<std::string> warnings;

  double mu(double x1, double x2) const;
  double lambda(double x1, double x2) const;
  std::array<double, 2> grad_mu(double x1, double x2) const;

  // direct-summation reference evaluation (bypasses grids and splines)
  double mu_direct(double x1, double x2) const;
  double lambda_direct(double x1, double x2) const;
  std::array<double, 2> grad_mu_direct(double x1, double x2) const;

private:
  const ClosedForm* mu0_ = nullptr;
  const ClosedForm* lambda_hat0_ = nullptr;
  friend FieldSample sample_fields(const FieldSpec&, std::span<const double>,
                                   std::span<const double>);
};

// y.size() must equal spec.s_mu, z.size() spec.s_lambda; entries must lie in
// [-1/2, 1/2]. Sets bound_violation (and a warning) if a sampled coefficient
// drops below its declared minimum anywhere on the value grid.
FieldSample sample_fields(const FieldSpec& spec, std::span<const double> y,
                          std::span<const double> z);

}  // namespace elastuq

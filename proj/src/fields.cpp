#include "elastuq/fields.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "elastuq/common.hpp"

namespace elastuq {

namespace {

constexpr double kPi = 3.14159265358979323846;

// FFTW plan creation/destruction is not thread safe; execution is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  double* p = nullptr;
  explicit FftwBuffer(std::size_t n) : p(static_cast<double*>(fftw_malloc(n * sizeof(double)))) {}
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

void run_r2r_2d(int n0, int n1, double* in, double* out, fftw_r2r_kind k0,
                fftw_r2r_kind k1) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_r2r_2d(n0, n1, in, out, k0, k1, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
}

// scaled coefficient of the j-th term (0-based position in coeffs)
double scaled_coeff(double cj, std::int64_t j1, double alpha, double m_alpha,
                    std::int64_t* k_out, std::int64_t* l_out) {
  const auto kl = rho_inverse(j1);
  *k_out = kl[0];
  *l_out = kl[1];
  return cj / (m_alpha * std::pow(double(kl[0] + kl[1]), 2.0 * alpha));
}

}  // namespace

double zeta_normalizer(double alpha) {
  if (!(alpha > 1.0)) throw ConfigError("fields: decay exponent alpha must be > 1");
  return std::riemann_zeta(2.0 * alpha - 1.0) - std::riemann_zeta(2.0 * alpha);
}

std::int64_t rho_index(std::int64_t k, std::int64_t l) {
  if (k < 1 || l < 1) throw std::invalid_argument("rho_index: k, l must be >= 1");
  const std::int64_t m = k + l;
  return (m - 2) * (m - 1) / 2 + (m - k);
}

std::array<std::int64_t, 2> rho_inverse(std::int64_t j) {
  if (j < 1) throw std::invalid_argument("rho_inverse: index must be >= 1");
  // smallest m with m(m-1)/2 >= j
  std::int64_t m = static_cast<std::int64_t>((1.0 + std::sqrt(1.0 + 8.0 * double(j))) / 2.0);
  while (m * (m - 1) / 2 < j) ++m;
  while ((m - 1) * (m - 2) / 2 >= j) --m;
  const std::int64_t k = m - (j - (m - 2) * (m - 1) / 2);
  return {k, m - k};
}

double basis_sup_norm(std::int64_t j, double alpha) {
  const auto kl = rho_inverse(j);
  return 1.0 / (zeta_normalizer(alpha) * std::pow(double(kl[0] + kl[1]), 2.0 * alpha));
}

double coefficient_tail_bound(std::int64_t s, double alpha) {
  const double m_alpha = zeta_normalizer(alpha);
  const auto kl = rho_inverse(s + 1);
  const std::int64_t m_first = kl[0] + kl[1];
  // remaining entries on the partial diagonal of j = s+1
  double acc = double(kl[0]) * std::pow(double(m_first), -2.0 * alpha);
  // whole diagonals after that; diagonal m has m-1 entries
  for (std::int64_t m = m_first + 1;; ++m) {
    const double term = double(m - 1) * std::pow(double(m), -2.0 * alpha);
    acc += term;
    if (term < 1e-17 * acc && m > m_first + 8) break;
  }
  return 0.5 * acc / m_alpha;
}

const ClosedForm& coefficient_form(const std::string& id) {
  static const std::map<std::string, ClosedForm> registry = [] {
    std::map<std::string, ClosedForm> r;
    r["one"] = {"one", [](double, double) { return 1.0; },
                [](double, double) { return std::array<double, 2>{0.0, 0.0}; }};
    r["one_plus_x1_plus_x2"] = {"one_plus_x1_plus_x2",
                                [](double x1, double x2) { return 1.0 + x1 + x2; },
                                [](double, double) {
                                  return std::array<double, 2>{1.0, 1.0};
                                }};
    r["one_plus_half_sin_2pi_x1"] = {
        "one_plus_half_sin_2pi_x1",
        [](double x1, double) { return 1.0 + 0.5 * std::sin(2.0 * kPi * x1); },
        [](double x1, double) {
          return std::array<double, 2>{kPi * std::cos(2.0 * kPi * x1), 0.0};
        }};
    r["one_plus_half_sin_2x1"] = {
        "one_plus_half_sin_2x1",
        [](double x1, double) { return 1.0 + 0.5 * std::sin(2.0 * x1); },
        [](double x1, double) {
          return std::array<double, 2>{std::cos(2.0 * x1), 0.0};
        }};
    return r;
  }();
  const auto it = registry.find(id);
  if (it == registry.end()) {
    std::ostringstream os;
    os << "fields: unknown coefficient form '" << id << "'; valid:";
    for (const auto& [k, v] : registry) os << ' ' << k;
    throw ConfigError(os.str());
  }
  return it->second;
}

std::vector<std::string> coefficient_form_ids() {
  return {"one", "one_plus_x1_plus_x2", "one_plus_half_sin_2pi_x1",
          "one_plus_half_sin_2x1"};
}

SineGrid eval_field_grid(std::span<const double> coeffs, double alpha, int m) {
  if (m < 2) throw ConfigError("fields: synthesis grid must have m >= 2");
  const double m_alpha = zeta_normalizer(alpha);
  const int n = m - 1;
  FftwBuffer in(std::size_t(n) * n), out(std::size_t(n) * n);
  std::fill(in.p, in.p + std::size_t(n) * n, 0.0);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    std::int64_t k = 0, l = 0;
    const double c = scaled_coeff(coeffs[j], std::int64_t(j) + 1, alpha, m_alpha, &k, &l);
    if (k >= m || l >= m)
      throw ConfigError("fields: active frequency reaches the grid Nyquist limit");
    in.p[(k - 1) * n + (l - 1)] = c;
  }
  run_r2r_2d(n, n, in.p, out.p, FFTW_RODFT00, FFTW_RODFT00);
  SineGrid g;
  g.m = m;
  g.v = Eigen::MatrixXd::Zero(m + 1, m + 1);
  for (int a = 1; a < m; ++a)
    for (int b = 1; b < m; ++b) g.v(a, b) = 0.25 * out.p[(a - 1) * n + (b - 1)];
  return g;
}

std::array<SineGrid, 2> eval_grad_grid(std::span<const double> coeffs, double alpha,
                                       int m) {
  if (m < 2) throw ConfigError("fields: synthesis grid must have m >= 2");
  const double m_alpha = zeta_normalizer(alpha);
  const int nc = m + 1;  // cosine axis length
  const int ns = m - 1;  // sine axis length
  std::array<SineGrid, 2> out;

  // dS/dx1: cosine along x1, sine along x2
  {
    FftwBuffer in(std::size_t(nc) * ns), o(std::size_t(nc) * ns);
    std::fill(in.p, in.p + std::size_t(nc) * ns, 0.0);
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      std::int64_t k = 0, l = 0;
      const double c = scaled_coeff(coeffs[j], std::int64_t(j) + 1, alpha, m_alpha, &k, &l);
      if (k >= m || l >= m)
        throw ConfigError("fields: active frequency reaches the grid Nyquist limit");
      in.p[k * ns + (l - 1)] = 0.25 * double(k) * kPi * c;
    }
    run_r2r_2d(nc, ns, in.p, o.p, FFTW_REDFT00, FFTW_RODFT00);
    out[0].m = m;
    out[0].v = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (int a = 0; a <= m; ++a)
      for (int b = 1; b < m; ++b) out[0].v(a, b) = o.p[a * ns + (b - 1)];
  }
  // dS/dx2: sine along x1, cosine along x2
  {
    FftwBuffer in(std::size_t(ns) * nc), o(std::size_t(ns) * nc);
    std::fill(in.p, in.p + std::size_t(ns) * nc, 0.0);
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      std::int64_t k = 0, l = 0;
      const double c = scaled_coeff(coeffs[j], std::int64_t(j) + 1, alpha, m_alpha, &k, &l);
      in.p[(k - 1) * nc + l] = 0.25 * double(l) * kPi * c;
    }
    run_r2r_2d(ns, nc, in.p, o.p, FFTW_RODFT00, FFTW_REDFT00);
    out[1].m = m;
    out[1].v = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (int a = 1; a < m; ++a)
      for (int b = 0; b <= m; ++b) out[1].v(a, b) = o.p[(a - 1) * nc + b];
  }
  return out;
}

double eval_field_direct(std::span<const double> coeffs, double alpha, double x1,
                         double x2) {
  const double m_alpha = zeta_normalizer(alpha);
  double acc = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    std::int64_t k = 0, l = 0;
    const double c = scaled_coeff(coeffs[j], std::int64_t(j) + 1, alpha, m_alpha, &k, &l);
    acc += c * std::sin(k * kPi * x1) * std::sin(l * kPi * x2);
  }
  return acc;
}

std::array<double, 2> eval_grad_direct(std::span<const double> coeffs, double alpha,
                                       double x1, double x2) {
  const double m_alpha = zeta_normalizer(alpha);
  std::array<double, 2> acc{0.0, 0.0};
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    std::int64_t k = 0, l = 0;
    const double c = scaled_coeff(coeffs[j], std::int64_t(j) + 1, alpha, m_alpha, &k, &l);
    acc[0] += c * double(k) * kPi * std::cos(k * kPi * x1) * std::sin(l * kPi * x2);
    acc[1] += c * double(l) * kPi * std::sin(k * kPi * x1) * std::cos(l * kPi * x2);
  }
  return acc;
}

double FieldSample::mu(double x1, double x2) const {
  double v = mu0_->value(x1, x2);
  if (mu_random) v += s_mu(x1, x2);
  return v;
}

double FieldSample::lambda(double x1, double x2) const {
  double v = lambda_hat0_->value(x1, x2);
  if (lambda_random) v += s_lambda(x1, x2);
  return spec.Lambda * v;
}

std::array<double, 2> FieldSample::grad_mu(double x1, double x2) const {
  auto g = mu0_->grad(x1, x2);
  if (mu_random) {
    g[0] += ds_mu_1(x1, x2);
    g[1] += ds_mu_2(x1, x2);
  }
  return g;
}

double FieldSample::mu_direct(double x1, double x2) const {
  double v = mu0_->value(x1, x2);
  if (mu_random) v += eval_field_direct(y, spec.alpha, x1, x2);
  return v;
}

double FieldSample::lambda_direct(double x1, double x2) const {
  double v = lambda_hat0_->value(x1, x2);
  if (lambda_random) v += eval_field_direct(z, spec.alpha, x1, x2);
  return spec.Lambda * v;
}

std::array<double, 2> FieldSample::grad_mu_direct(double x1, double x2) const {
  auto g = mu0_->grad(x1, x2);
  if (mu_random) {
    const auto gs = eval_grad_direct(y, spec.alpha, x1, x2);
    g[0] += gs[0];
    g[1] += gs[1];
  }
  return g;
}

FieldSample sample_fields(const FieldSpec& spec, std::span<const double> y,
                          std::span<const double> z) {
  if (static_cast<int>(y.size()) != spec.s_mu)
    throw ConfigError("sample_fields: y size does not match s_mu");
  if (static_cast<int>(z.size()) != spec.s_lambda)
    throw ConfigError("sample_fields: z size does not match s_lambda");
  if (!(spec.Lambda >= 1.0))
    throw ConfigError("sample_fields: Lambda must be >= 1");
  for (double v : y)
    if (std::abs(v) > 0.5 + 1e-12)
      throw ConfigError("sample_fields: y coordinate outside [-1/2, 1/2]");
  for (double v : z)
    if (std::abs(v) > 0.5 + 1e-12)
      throw ConfigError("sample_fields: z coordinate outside [-1/2, 1/2]");

  FieldSample smp;
  smp.spec = spec;
  smp.y.assign(y.begin(), y.end());
  smp.z.assign(z.begin(), z.end());
  smp.mu_random = spec.s_mu > 0;
  smp.lambda_random = spec.s_lambda > 0;
  smp.mu0_ = &coefficient_form(spec.mu0);
  smp.lambda_hat0_ = &coefficient_form(spec.lambda_hat0);

  const int m = spec.grid_m;
  const int mg = spec.grid_m_grad;

  smp.mu_grid_min = 1e300;
  smp.lambda_hat_grid_min = 1e300;

  if (smp.mu_random) {
    const SineGrid g = eval_field_grid(y, spec.alpha, m);
    for (int a = 0; a <= m; ++a)
      for (int b = 0; b <= m; ++b) {
        const double v = smp.mu0_->value(double(a) / m, double(b) / m) + g.v(a, b);
        smp.mu_grid_min = std::min(smp.mu_grid_min, v);
      }
    smp.s_mu = BicubicSpline(g.v, BicubicSpline::Axis::Odd, BicubicSpline::Axis::Odd);
    const auto gg = eval_grad_grid(y, spec.alpha, mg);
    for (int a = 0; a <= mg; ++a)
      for (int b = 0; b <= mg; ++b)
        smp.grad_mu_grid_max =
            std::max(smp.grad_mu_grid_max,
                     std::hypot(gg[0].v(a, b), gg[1].v(a, b)));
    smp.ds_mu_1 =
        BicubicSpline(gg[0].v, BicubicSpline::Axis::Even, BicubicSpline::Axis::Odd);
    smp.ds_mu_2 =
        BicubicSpline(gg[1].v, BicubicSpline::Axis::Odd, BicubicSpline::Axis::Even);
  } else {
    for (int a = 0; a <= m; ++a)
      for (int b = 0; b <= m; ++b)
        smp.mu_grid_min = std::min(
            smp.mu_grid_min, smp.mu0_->value(double(a) / m, double(b) / m));
  }

  if (smp.lambda_random) {
    const SineGrid g = eval_field_grid(z, spec.alpha, m);
    for (int a = 0; a <= m; ++a)
      for (int b = 0; b <= m; ++b) {
        const double v =
            smp.lambda_hat0_->value(double(a) / m, double(b) / m) + g.v(a, b);
        smp.lambda_hat_grid_min = std::min(smp.lambda_hat_grid_min, v);
      }
    smp.s_lambda =
        BicubicSpline(g.v, BicubicSpline::Axis::Odd, BicubicSpline::Axis::Odd);
  } else {
    for (int a = 0; a <= m; ++a)
      for (int b = 0; b <= m; ++b)
        smp.lambda_hat_grid_min =
            std::min(smp.lambda_hat_grid_min,
                     smp.lambda_hat0_->value(double(a) / m, double(b) / m));
  }

  if (smp.mu_grid_min < spec.mu_min - 1e-12) {
    smp.bound_violation = true;
    smp.warnings.push_back("sampled mu drops below its declared minimum (" +
                           format_sci(smp.mu_grid_min, 6) + " < " +
                           format_sci(spec.mu_min, 6) + ")");
  }
  if (smp.lambda_hat_grid_min < spec.lambda_hat_min - 1e-12) {
    smp.bound_violation = true;
    smp.warnings.push_back("sampled lambda_hat drops below its declared minimum (" +
                           format_sci(smp.lambda_hat_grid_min, 6) + " < " +
                           format_sci(spec.lambda_hat_min, 6) + ")");
  }
  if (spec.grad_warn_threshold > 0.0 &&
      smp.grad_mu_grid_max > spec.grad_warn_threshold) {
    smp.warnings.push_back("max |grad mu perturbation| " +
                           format_sci(smp.grad_mu_grid_max, 6) +
                           " exceeds the advisory threshold " +
                           format_sci(spec.grad_warn_threshold, 6) +
                           "; the coercivity margin is not guaranteed");
  }
  return smp;
}

}  // namespace elastuq

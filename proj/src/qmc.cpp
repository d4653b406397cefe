#include "elastuq/qmc.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "elastuq/common.hpp"

namespace elastuq {

namespace {

using Poly = std::vector<std::uint8_t>;

int poly_deg(const Poly& p) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
    if (p[i]) return i;
  return -1;
}

// (x * t) mod p for monic p of degree m; t has degree < m
void shift_mod(Poly& t, const Poly& p, int m, int b) {
  const int carry = t[m - 1];
  for (int i = m - 1; i >= 1; --i) t[i] = t[i - 1];
  t[0] = 0;
  if (carry) {
    for (int i = 0; i < m; ++i) {
      int v = (t[i] - carry * p[i]) % b;
      if (v < 0) v += b;
      t[i] = static_cast<std::uint8_t>(v);
    }
  }
}

void validate_rule(const LatticeRule& r) {
  if (!is_prime_base(r.b)) throw ConfigError("qmc: base must be prime");
  if (r.m < 1 || r.m > 40) throw ConfigError("qmc: m out of range");
  if (r.s < 1) throw ConfigError("qmc: dimension must be >= 1");
  if (r.interlace < 1) throw ConfigError("qmc: interlacing order must be >= 1");
  if (static_cast<int>(r.modulus.size()) != r.m + 1 || r.modulus[r.m] != 1)
    throw ConfigError("qmc: modulus must be monic of degree m");
  if (static_cast<std::int64_t>(r.gen.size()) !=
      static_cast<std::int64_t>(r.interlace) * r.s)
    throw ConfigError("qmc: generating vector length must be d*s");
  for (const auto& g : r.gen) {
    if (static_cast<int>(g.size()) != r.m)
      throw ConfigError("qmc: generating polynomial coefficient count must be m");
    if (poly_deg(g) < 0)
      throw ConfigError("qmc: generating polynomial must be nonzero");
  }
  if (r.m * std::log2(double(r.b)) > 62)
    throw ConfigError("qmc: b^m exceeds the supported range");
}

}  // namespace

std::int64_t LatticeRule::n_points() const {
  std::int64_t n = 1;
  for (int i = 0; i < m; ++i) n *= b;
  return n;
}

bool is_prime_base(int b) {
  if (b < 2) return false;
  for (int d = 2; d * d <= b; ++d)
    if (b % d == 0) return false;
  return true;
}

LatticeRule load_genvec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw AssetError("genvec: cannot open " + path);
  LatticeRule r;
  std::string line;
  if (!std::getline(is, line))
    throw AssetError("genvec: missing header line in " + path);
  {
    std::istringstream hs(line);
    if (!(hs >> r.b >> r.m >> r.s >> r.interlace))
      throw AssetError("genvec: malformed header (want 'b m s d') in " + path);
  }
  if (!std::getline(is, line))
    throw AssetError("genvec: missing modulus line in " + path);
  {
    std::istringstream ms(line);
    int c = 0;
    while (ms >> c) r.modulus.push_back(static_cast<std::uint8_t>(c));
  }
  const std::int64_t want = static_cast<std::int64_t>(r.interlace) * r.s;
  for (std::int64_t k = 0; k < want; ++k) {
    if (!std::getline(is, line))
      throw AssetError("genvec: expected " + std::to_string(want) +
                       " generating polynomial lines, got " + std::to_string(k) +
                       " in " + path);
    std::istringstream gs(line);
    Poly g;
    int c = 0;
    while (gs >> c) g.push_back(static_cast<std::uint8_t>(c));
    if (static_cast<int>(g.size()) > r.m)
      throw AssetError("genvec: line " + std::to_string(k + 3) +
                       " has degree >= m in " + path);
    g.resize(r.m, 0);
    r.gen.push_back(std::move(g));
  }
  try {
    validate_rule(r);
  } catch (const ConfigError& e) {
    throw AssetError(std::string("genvec: ") + e.what() + " in " + path);
  }
  return r;
}

LatticeRule truncate_rule(const LatticeRule& r, int s_target) {
  if (s_target < 1 || s_target > r.s)
    throw AssetError("qmc: truncation dimension outside [1, s]");
  LatticeRule out = r;
  out.s = s_target;
  out.gen.assign(r.gen.begin(),
                 r.gen.begin() + static_cast<std::int64_t>(r.interlace) * s_target);
  return out;
}

Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> base_lattice_digits(
    const LatticeRule& r) {
  validate_rule(r);
  const std::int64_t N = r.n_points();
  const int cols = r.interlace * r.s;
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> out(N, cols);

  std::vector<std::uint64_t> bpow(r.m + 1, 1);
  for (int i = 1; i <= r.m; ++i) bpow[i] = bpow[i - 1] * r.b;

  for (int c = 0; c < cols; ++c) {
    // tab[i] = (x^i q_c) mod p
    std::vector<Poly> tab(r.m);
    Poly t = r.gen[c];
    for (int i = 0; i < r.m; ++i) {
      tab[i] = t;
      shift_mod(t, r.modulus, r.m, r.b);
    }
    Poly w(r.m, 0), num(2 * r.m, 0);
    for (std::int64_t n = 0; n < N; ++n) {
      std::fill(w.begin(), w.end(), 0);
      std::int64_t nn = n;
      for (int i = 0; i < r.m && nn; ++i, nn /= r.b) {
        const int di = static_cast<int>(nn % r.b);
        if (di)
          for (int j = 0; j < r.m; ++j)
            w[j] = static_cast<std::uint8_t>((w[j] + di * tab[i][j]) % r.b);
      }
      // quotient of w * x^m by the monic modulus
      std::fill(num.begin(), num.end(), 0);
      for (int j = 0; j < r.m; ++j) num[j + r.m] = w[j];
      std::uint64_t u = 0;
      for (int i = 2 * r.m - 1; i >= r.m; --i) {
        const int cq = num[i];
        if (cq) {
          u += static_cast<std::uint64_t>(cq) * bpow[i - r.m];
          for (int j = 0; j <= r.m; ++j) {
            int v = num[i - r.m + j] - cq * r.modulus[j];
            v %= r.b;
            if (v < 0) v += r.b;
            num[i - r.m + j] = static_cast<std::uint8_t>(v);
          }
        }
      }
      out(n, c) = u;
    }
  }
  return out;
}

Eigen::MatrixXd base_lattice_points(const LatticeRule& r) {
  const auto digits = base_lattice_digits(r);
  const double scale = 1.0 / double(r.n_points());
  Eigen::MatrixXd out(digits.rows(), digits.cols());
  for (Eigen::Index i = 0; i < digits.rows(); ++i)
    for (Eigen::Index j = 0; j < digits.cols(); ++j)
      out(i, j) = double(digits(i, j)) * scale;
  return out;
}

Eigen::MatrixXd interlace_base(
    const Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>& digits,
    int b, int m, int d) {
  if (digits.cols() % d != 0)
    throw ConfigError("qmc: interlace input column count not divisible by d");
  const Eigen::Index N = digits.rows();
  const Eigen::Index s = digits.cols() / d;
  std::vector<std::uint64_t> bpow(m + 1, 1);
  for (int i = 1; i <= m; ++i) bpow[i] = bpow[i - 1] * b;
  std::vector<double> invpow(static_cast<std::size_t>(d) * m + 1, 1.0);
  for (std::size_t k = 1; k < invpow.size(); ++k) invpow[k] = invpow[k - 1] / b;
  Eigen::MatrixXd out(N, s);
  for (Eigen::Index n = 0; n < N; ++n)
    for (Eigen::Index j = 0; j < s; ++j) {
      double v = 0.0;
      for (int i = m; i >= 1; --i)  // deepest digits first
        for (int t = d - 1; t >= 0; --t) {
          const std::uint64_t u = digits(n, d * j + t);
          const int digit = static_cast<int>((u / bpow[m - i]) % b);
          if (digit) v += digit * invpow[(i - 1) * d + t + 1];
        }
      out(n, j) = v;
    }
  return out;
}

PointSet interlaced_points(const LatticeRule& r) {
  PointSet ps;
  ps.pts = interlace_base(base_lattice_digits(r), r.b, r.m, r.interlace);
  ps.provenance = rule_id(r);
  return ps;
}

PointSet combined_nodes(const LatticeRule& r, int s1, int s2) {
  if (s1 < 0 || s2 < 0 || s1 + s2 < 1)
    throw ConfigError("qmc: combined node split must be nonnegative, nonempty");
  if (s1 + s2 > r.s)
    throw AssetError("qmc: rule dimension " + std::to_string(r.s) +
                     " too small for s1+s2 = " + std::to_string(s1 + s2));
  return interlaced_points(truncate_rule(r, s1 + s2));
}

Eigen::MatrixXd tensor_nodes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() + b.cols());
  for (Eigen::Index k = 0; k < b.rows(); ++k)
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      out.block(k * a.rows() + j, 0, 1, a.cols()) = a.row(j);
      out.block(k * a.rows() + j, a.cols(), 1, b.cols()) = b.row(k);
    }
  return out;
}

bool tensor_balance_ok(int m1, int m2, double p, double q) {
  return std::abs(double(m1) * q - double(m2) * p) < 1.0;
}

void shift_center(Eigen::MatrixXd& pts) { pts.array() -= 0.5; }

Eigen::MatrixXd mc_points(std::int64_t n, int s, std::uint64_t seed) {
  if (n < 1 || s < 1) throw ConfigError("qmc: mc_points needs n >= 1, s >= 1");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd out(n, s);
  for (std::int64_t i = 0; i < n; ++i)
    for (int j = 0; j < s; ++j) out(i, j) = (rng() >> 11) * 0x1.0p-53;
  return out;
}

std::uint64_t rule_hash(const LatticeRule& r) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const int header[4] = {r.b, r.m, r.s, r.interlace};
  h = fnv1a(header, sizeof header, h);
  h = fnv1a(r.modulus.data(), r.modulus.size(), h);
  for (const auto& g : r.gen) h = fnv1a(g.data(), g.size(), h);
  return h;
}

std::string rule_id(const LatticeRule& r) {
  std::ostringstream os;
  os << "plr b" << r.b << " m" << r.m << " d" << r.interlace << " s" << r.s
     << std::hex << " h" << rule_hash(r);
  return os.str();
}

}  // namespace elastuq

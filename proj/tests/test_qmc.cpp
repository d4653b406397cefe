#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "elastuq/common.hpp"
#include "elastuq/qmc.hpp"

using namespace elastuq;

namespace {

const std::string kGenvecDir = std::string(ELASTUQ_DATA_DIR) + "/genvec";

LatticeRule tiny_rule(int m, std::vector<std::uint8_t> modulus,
                      std::vector<std::vector<std::uint8_t>> gen, int d = 1) {
  LatticeRule r;
  r.b = 2;
  r.m = m;
  r.s = static_cast<int>(gen.size()) / d;
  r.interlace = d;
  r.modulus = std::move(modulus);
  for (auto& g : gen) {
    g.resize(m, 0);
    r.gen.push_back(g);
  }
  return r;
}

// GF(2) irreducibility by brute-force trial division (bitmask polynomials)
bool gf2_irreducible(std::uint64_t p) {
  auto deg = [](std::uint64_t x) { return 63 - __builtin_clzll(x); };
  const int m = deg(p);
  for (std::uint64_t f = 2; f < (1ull << (m / 2 + 1)); ++f) {
    if (deg(f) > m / 2) break;
    std::uint64_t r = p;
    while (r && deg(r) >= deg(f)) r ^= f << (deg(r) - deg(f));
    if (r == 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("hand example: b=2, m=1, p=x, q=1 gives {0, 1/2}") {
  const auto r = tiny_rule(1, {0, 1}, {{1}});
  const Eigen::MatrixXd pts = base_lattice_points(r);
  REQUIRE(pts.rows() == 2);
  CHECK(pts(0, 0) == 0.0);
  CHECK(pts(1, 0) == 0.5);
}

TEST_CASE("hand example: m=2, p=x^2+x+1, q=1 permutes {0,1/4,1/2,3/4}") {
  const auto r = tiny_rule(2, {1, 1, 1}, {{1}});
  const Eigen::MatrixXd pts = base_lattice_points(r);
  REQUIRE(pts.rows() == 4);
  CHECK(pts(0, 0) == 0.0);
  CHECK(pts(1, 0) == 0.25);
  CHECK(pts(2, 0) == 0.75);
  CHECK(pts(3, 0) == 0.5);
}

TEST_CASE("digit interlacing: (.1, .1) with d=2 becomes .11 = 3/4") {
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> digits(1, 2);
  digits(0, 0) = 1;  // value 1/2 with m=1
  digits(0, 1) = 1;
  const Eigen::MatrixXd out = interlace_base(digits, 2, 1, 2);
  REQUIRE(out.cols() == 1);
  CHECK(out(0, 0) == 0.75);
}

TEST_CASE("interlacing is exact: digits land at depth (i-1)d+t+1") {
  // m=3 digits u = u1 u2 u3; with d=2 and columns (A, B):
  // value = .A1 B1 A2 B2 A3 B3 in base 2
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> digits(1, 2);
  digits(0, 0) = 0b101;  // A = 1,0,1
  digits(0, 1) = 0b011;  // B = 0,1,1
  const Eigen::MatrixXd out = interlace_base(digits, 2, 3, 2);
  const double expect = 0b100111 / 64.0;  // .1 0 0 1 1 1
  CHECK(out(0, 0) == expect);
}

TEST_CASE("bundled files load, are irreducible, and have full column counts") {
  for (int d : {2, 3})
    for (int m = 2; m <= 10; ++m) {
      const auto r = load_genvec(kGenvecDir + "/b2_m" + std::to_string(m) + "_d" +
                                 std::to_string(d) + "_s256.txt");
      CHECK(r.b == 2);
      CHECK(r.m == m);
      CHECK(r.s == 256);
      CHECK(r.interlace == d);
      std::uint64_t p = 0;
      for (int i = 0; i <= m; ++i)
        p |= static_cast<std::uint64_t>(r.modulus[i]) << i;
      CHECK(gf2_irreducible(p));
    }
}

TEST_CASE("loads are deterministic and provenance carries the content hash") {
  const std::string path = kGenvecDir + "/b2_m5_d2_s256.txt";
  const auto a = load_genvec(path);
  const auto b = load_genvec(path);
  CHECK(rule_hash(a) == rule_hash(b));
  const auto ps = interlaced_points(truncate_rule(a, 3));
  CHECK(ps.provenance.find("b2") != std::string::npos);
  CHECK(ps.provenance.find("m5") != std::string::npos);
  CHECK(ps.provenance.find(" h") != std::string::npos);
}

TEST_CASE("malformed genvec files are rejected with the offending detail") {
  auto write_tmp = [](const std::string& text) {
    const std::string path = "/tmp/elastuq_genvec_bad.txt";
    std::ofstream os(path);
    os << text;
    return path;
  };
  CHECK_THROWS_AS(load_genvec("/tmp/elastuq_no_such_file.txt"), AssetError);
  CHECK_THROWS_AS(load_genvec(write_tmp("2 3\n1 1 0 1\n1 0 0\n")), AssetError);
  // degree >= m
  CHECK_THROWS_AS(load_genvec(write_tmp("2 2 1 1\n1 1 1\n1 0 1\n")), AssetError);
  // too few generator lines
  CHECK_THROWS_AS(load_genvec(write_tmp("2 2 2 2\n1 1 1\n1 0\n")), AssetError);
  // modulus not monic of degree m
  CHECK_THROWS_AS(load_genvec(write_tmp("2 2 1 1\n1 1 0\n1 0\n")), AssetError);
  std::remove("/tmp/elastuq_genvec_bad.txt");
}

TEST_CASE("each base coordinate is a permutation of {k/N}: equidistribution") {
  for (int m = 2; m <= 10; ++m) {
    const auto r =
        truncate_rule(load_genvec(kGenvecDir + "/b2_m" + std::to_string(m) +
                                  "_d2_s256.txt"),
                      4);
    const Eigen::MatrixXd pts = base_lattice_points(r);
    const auto N = pts.rows();
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      std::set<double> vals;
      Eigen::Index lo = 0;
      for (Eigen::Index n = 0; n < N; ++n) {
        vals.insert(pts(n, j));
        if (pts(n, j) < 0.5) ++lo;
      }
      CHECK(static_cast<Eigen::Index>(vals.size()) == N);  // distinct values
      CHECK(lo == N / 2);  // exactly b^(m-1) per 1/b interval
    }
  }
}

TEST_CASE("interlaced coordinates remain half-interval balanced") {
  const auto r = truncate_rule(load_genvec(kGenvecDir + "/b2_m6_d2_s256.txt"), 5);
  const auto ps = interlaced_points(r);
  for (Eigen::Index j = 0; j < ps.pts.cols(); ++j) {
    Eigen::Index lo = 0;
    for (Eigen::Index n = 0; n < ps.pts.rows(); ++n)
      if (ps.pts(n, j) < 0.5) ++lo;
    CHECK(lo == ps.pts.rows() / 2);
  }
}

TEST_CASE("truncation is a projection: shared dimensions keep their points") {
  const auto r = load_genvec(kGenvecDir + "/b2_m5_d2_s256.txt");
  const auto big = interlaced_points(truncate_rule(r, 12));
  const auto small = interlaced_points(truncate_rule(r, 5));
  CHECK(big.pts.leftCols(5) == small.pts);
}

TEST_CASE("product integrand estimate is far below the MC standard error") {
  const auto r = truncate_rule(load_genvec(kGenvecDir + "/b2_m8_d2_s256.txt"), 4);
  auto ps = interlaced_points(r);
  shift_center(ps.pts);
  double acc = 0.0;
  for (Eigen::Index n = 0; n < ps.pts.rows(); ++n) {
    double p = 1.0;
    for (int j = 0; j < 4; ++j) p *= ps.pts(n, j);
    acc += p;
  }
  const double estimate = std::abs(acc / double(ps.pts.rows()));
  const double mc_se = std::pow(1.0 / 12.0, 2.0) / std::sqrt(256.0);
  CHECK(estimate <= mc_se);
}

TEST_CASE("coordinate means match the digital-net value (N-1)/(2N)") {
  const auto r = truncate_rule(load_genvec(kGenvecDir + "/b2_m7_d2_s256.txt"), 3);
  const Eigen::MatrixXd pts = base_lattice_points(r);
  const double want = (double(pts.rows()) - 1.0) / (2.0 * double(pts.rows()));
  for (Eigen::Index j = 0; j < pts.cols(); ++j)
    CHECK(pts.col(j).mean() == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("smooth-integrand convergence: interlaced rule beats the MC rate") {
  const int s = 8;
  auto integrand = [&](const Eigen::MatrixXd& pts) {
    double acc = 0.0;
    for (Eigen::Index n = 0; n < pts.rows(); ++n) {
      double p = 1.0;
      for (int j = 0; j < s; ++j)
        p *= 1.0 + 3.0 * std::pow(j + 1.0, -2.0) * (pts(n, j) * pts(n, j) - 1.0 / 3.0);
      acc += p;
    }
    return acc / double(pts.rows());  // exact integral is 1
  };
  std::vector<double> log_n, log_err;
  for (int m = 4; m <= 10; ++m) {
    const auto r = truncate_rule(
        load_genvec(kGenvecDir + "/b2_m" + std::to_string(m) + "_d2_s256.txt"), s);
    const double err = std::abs(integrand(interlaced_points(r).pts) - 1.0);
    log_n.push_back(std::log(std::pow(2.0, m)));
    log_err.push_back(std::log(std::max(err, 1e-300)));
  }
  // least-squares slope
  auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  CHECK(slope(log_n, log_err) < -1.0);

  // seeded MC baseline on the same integrand decays at about -1/2
  std::vector<double> mlog_n, mlog_err;
  for (int m = 4; m <= 10; ++m) {
    const std::int64_t N = 1ll << m;
    double rms = 0.0;
    const int reps = 16;
    for (int rep = 0; rep < reps; ++rep) {
      const double e = integrand(mc_points(N, s, 1000 + 97 * rep)) - 1.0;
      rms += e * e;
    }
    mlog_n.push_back(std::log(double(N)));
    mlog_err.push_back(0.5 * std::log(rms / reps));
  }
  const double mc_slope = slope(mlog_n, mlog_err);
  CHECK(mc_slope < -0.3);
  CHECK(mc_slope > -0.8);
}

TEST_CASE("tensor nodes pair every row with first-factor index fastest") {
  Eigen::MatrixXd a(2, 1), b(3, 2);
  a << 0.1, 0.2;
  b << 1, 10, 2, 20, 3, 30;
  const Eigen::MatrixXd t = tensor_nodes(a, b);
  REQUIRE(t.rows() == 6);
  REQUIRE(t.cols() == 3);
  CHECK(t(0, 0) == 0.1);
  CHECK(t(1, 0) == 0.2);
  CHECK(t(0, 1) == 1);
  CHECK(t(1, 1) == 1);
  CHECK(t(5, 0) == 0.2);
  CHECK(t(5, 2) == 30);
}

TEST_CASE("tensor balance check flags mismatched factor sizes") {
  CHECK(tensor_balance_ok(4, 4, 1.0, 1.0));
  CHECK_FALSE(tensor_balance_ok(2, 8, 1.0, 1.0));
  CHECK(tensor_balance_ok(4, 8, 1.0, 2.0));
}

TEST_CASE("center shift maps [0,1) onto [-1/2, 1/2)") {
  auto ps = interlaced_points(
      truncate_rule(load_genvec(kGenvecDir + "/b2_m4_d2_s256.txt"), 2));
  shift_center(ps.pts);
  CHECK(ps.pts.minCoeff() >= -0.5);
  CHECK(ps.pts.maxCoeff() < 0.5);
}

TEST_CASE("mc baseline is seeded and deterministic") {
  const auto a = mc_points(64, 5, 42);
  const auto b = mc_points(64, 5, 42);
  const auto c = mc_points(64, 5, 43);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(a.maxCoeff() < 1.0);
}

TEST_CASE("non-prime bases and bad truncations are rejected") {
  CHECK(is_prime_base(2));
  CHECK(is_prime_base(3));
  CHECK_FALSE(is_prime_base(4));
  CHECK_FALSE(is_prime_base(1));
  auto r = tiny_rule(2, {1, 1, 1}, {{1}});
  r.b = 4;
  CHECK_THROWS_AS(base_lattice_points(r), ConfigError);
  const auto ok = load_genvec(kGenvecDir + "/b2_m4_d2_s256.txt");
  CHECK_THROWS_AS(truncate_rule(ok, 0), AssetError);
  CHECK_THROWS_AS(truncate_rule(ok, 257), AssetError);
  CHECK_THROWS_AS(combined_nodes(ok, 200, 200), AssetError);
}

TEST_CASE("combined nodes expose both blocks of a single rule") {
  const auto r = load_genvec(kGenvecDir + "/b2_m4_d2_s256.txt");
  const auto ps = combined_nodes(r, 3, 2);
  CHECK(ps.pts.rows() == 16);
  CHECK(ps.pts.cols() == 5);
  const auto direct = interlaced_points(truncate_rule(r, 5));
  CHECK(ps.pts == direct.pts);
}

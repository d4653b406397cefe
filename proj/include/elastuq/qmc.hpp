#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace elastuq {

// Polynomial lattice rule over GF(b), b prime. The rule carries d*s
// generating polynomials: target dimension j is produced by digit-interlacing
// base columns d*j .. d*j+d-1.
struct LatticeRule {
  int b = 2;
  int m = 0;           // N = b^m points
  int s = 0;           // target dimensions after interlacing
  int interlace = 1;   // d
  std::vector<std::uint8_t> modulus;            // m+1 coefficients, ascending
  std::vector<std::vector<std::uint8_t>> gen;   // d*s polys, coefficients ascending

  std::int64_t n_points() const;
};

bool is_prime_base(int b);

// Reads the bundled text format: "b m s d", modulus coefficients, then d*s
// generating polynomial coefficient lines. Validation failures raise
// AssetError naming the offending line.
LatticeRule load_genvec(const std::string& path);

// First s_target dimensions of the rule (projection property of the net).
LatticeRule truncate_rule(const LatticeRule& r, int s_target);

// Base (non-interlaced) points: N x (d*s), column c from generating
// polynomial c; point n is the digit expansion of n(x) q_c(x) mod p(x).
Eigen::MatrixXd base_lattice_points(const LatticeRule& r);

// Digit-int representation: entry = sum_l u_l b^(m-l), value = entry / b^m.
Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> base_lattice_digits(
    const LatticeRule& r);

// Digit interlacing: digit i of base column d*j+t becomes digit (i-1)d+t+1 of
// output column j. Exact in double precision when d*m <= 53 for b = 2.
Eigen::MatrixXd interlace_base(
    const Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>& digits,
    int b, int m, int d);

struct PointSet {
  Eigen::MatrixXd pts;      // N x s in [0,1)
  std::string provenance;   // rule id + content hash
};

PointSet interlaced_points(const LatticeRule& r);

// Single-rule nodes spanning both coordinate blocks: first s1 columns for the
// first block, next s2 for the second. Requires r.s >= s1 + s2.
PointSet combined_nodes(const LatticeRule& r, int s1, int s2);

// All pairs of rows, first-factor index fastest:
// row k*rows(a)+j = [a.row(j), b.row(k)].
Eigen::MatrixXd tensor_nodes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Balance check for the two tensor factors given summability exponents p, q:
// the factor sizes b^m1, b^m2 are matched when m1 q ~ m2 p.
bool tensor_balance_ok(int m1, int m2, double p, double q);

// Translate points from [0,1)^s to [-1/2, 1/2)^s.
void shift_center(Eigen::MatrixXd& pts);

// Seeded pseudo-random baseline, deterministic across platforms.
Eigen::MatrixXd mc_points(std::int64_t n, int s, std::uint64_t seed);

std::uint64_t rule_hash(const LatticeRule& r);
std::string rule_id(const LatticeRule& r);

}  // namespace elastuq

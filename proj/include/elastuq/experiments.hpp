#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "elastuq/fem.hpp"
#include "elastuq/fields.hpp"
#include "elastuq/mesh.hpp"

namespace elastuq {

// Flat run configuration covering every experiment. Schema is fixed: the
// key=value parser rejects unknown keys and lists the valid ones. Fields that
// an experiment does not use are ignored by it but still hashed.
struct RunConfig {
  std::string experiment = "ex2";  // ex1 | ex2 | ex3 | ex4 | truncation
  std::string profile = "desk";    // desk | paper
  double Lambda = 1.0;
  int levels = 4;  // mesh family depth, level l uses n0 * 2^l cells per side
  int n0 = 4;
  double jitter = 0.0;
  std::uint64_t seed = 0;  // mesh jitter and MC baseline only

  std::string mu0 = "one";
  std::string lambda_hat0 = "one";
  double alpha = 2.0;
  int s_mu = 0;
  int s_lambda = 66;
  int grid_m = 64;
  int grid_m_grad = 128;

  std::string mode = "combined";  // combined | tensor | mc
  int interlace = 2;
  std::vector<int> n_list = {16, 32, 64, 128};
  int n_ref = 512;
  int mc_replications = 8;
  std::string genvec_dir = "data/genvec";

  std::vector<int> s_list;  // truncation study only
  int s_ref = 253;
  int trunc_n = 8;  // fixed mesh for the truncation study
  int trunc_m = 7;  // fixed rule size 2^trunc_m

  double tol = 1e-10;
  int max_iter = 500;
  int quad_degree = 4;

  std::string out_dir = ".";
  int workers = 1;
};

// Per-experiment defaults; the "paper" profile restores the larger dimensions
// and grids, "desk" is the reduced-scale configuration used by the tests.
RunConfig default_config(const std::string& experiment,
                         const std::string& profile = "desk");

// All valid schema keys, in canonical order.
const std::vector<std::string>& config_keys();

// Applies one key=value assignment; unknown keys raise ConfigError listing
// the valid keys. Integer lists are comma-separated.
void apply_assignment(RunConfig& cfg, const std::string& key,
                      const std::string& value);

// key=value lines over the defaults for the experiment named in the text
// (the experiment/profile keys are read first so defaults resolve correctly;
// remaining assignments override them). '#' starts a comment.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

void validate_config(const RunConfig& cfg);

// Canonical serialization (fixed key order, round-trip-exact numbers) and its
// FNV hash. Execution knobs (workers, out_dir) are excluded: they must not
// change any computed byte, so identical hash implies identical report bytes.
std::string canonical_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

// Classical Richardson table on functional values from meshes with h halving
// per level, assuming an error expansion in even powers of h. values[i] is
// the level-i functional. A table whose diagonal corrections stop shrinking
// is reported non-monotone and the value is taken at the deepest depth whose
// correction still shrank.
struct RichardsonResult {
  double value = 0.0;
  int depth = 0;  // number of eliminations applied to reach the value
  bool monotone = true;
  std::string warning;
};
RichardsonResult richardson_extrapolate(const std::vector<double>& values);

// Pairwise rates log(e_{i-1}/e_i) / |log(x_i/x_{i-1})| (positive for decaying
// error, matching the convention of convergence tables) and the signed
// least-squares slope of log e versus log x.
struct RateFit {
  std::vector<double> pairwise;
  double ls_slope = 0.0;
};
RateFit fit_rate(const std::vector<double>& errors, const std::vector<double>& xs);

// Report with byte-stable csv and manifest; wall-clock timing is confined to
// the timing text so identical configs reproduce identical report bytes at
// any worker count.
struct ExperimentReport {
  std::string csv;
  std::string manifest;
  std::string timing;
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> series;
  std::vector<std::string> warnings;
};

ExperimentReport run_example1(const RunConfig& cfg);
ExperimentReport run_qmc_study(const RunConfig& cfg);
ExperimentReport run_truncation_study(const RunConfig& cfg);
ExperimentReport run_experiment(const RunConfig& cfg);

// Writes report.csv, manifest.json, timing.txt under out_dir.
void write_report(const ExperimentReport& rep, const std::string& out_dir);

// Manufactured solution on (0, pi)^2 with mu = 1 + x1 + x2 and
// lambda = Lambda (1 + sin(2 x1) / 2); the body force comes from the strong
// form, and the average-of-u2 functional has the closed value 4 / Lambda.
struct Manufactured {
  Rect domain;
  VecFn u;
  GradFn grad_u;
  VecFn f;
  CoefficientField coeff;
  double functional = 0.0;
};
Manufactured example1_solution(double Lambda);

// Bundled generating-vector filename convention.
std::string genvec_path(const std::string& dir, int b, int m, int d);

}  // namespace elastuq

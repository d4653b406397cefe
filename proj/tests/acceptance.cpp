// Acceptance gate: one line per criterion, nonzero exit when any fails.
// Tolerances are pinned here; loosening them is a contract change.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elastuq/common.hpp"
#include "elastuq/experiments.hpp"
#include "elastuq/fem.hpp"
#include "elastuq/fields.hpp"
#include "elastuq/mesh.hpp"
#include "elastuq/qmc.hpp"
#include "elastuq/solver.hpp"

using namespace elastuq;

namespace {

const std::string kData = ELASTUQ_DATA_DIR;
const std::string kGenvec = kData + "/genvec";
constexpr double kPi = 3.14159265358979323846;

struct Criterion {
  int id;
  bool pass;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

bool in_window(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

RunConfig qmc_config(const std::string& experiment, double Lambda,
                     const std::string& mode) {
  RunConfig cfg = default_config(experiment, "desk");
  cfg.Lambda = Lambda;
  cfg.mode = mode;
  cfg.genvec_dir = kGenvec;
  return cfg;
}

// ---- criterion 5 properties -------------------------------------------------

bool prop_exact_symmetry(std::string& why) {
  const TriMesh mesh = make_structured_mesh({0, 0, 1, 1}, 6, 0.25, 11);
  FieldSpec spec;
  spec.mu0 = "one";
  spec.lambda_hat0 = "one_plus_half_sin_2pi_x1";
  spec.Lambda = 1000.0;
  spec.s_mu = 66;
  spec.grid_m = 64;
  spec.grid_m_grad = 128;
  std::vector<double> y(66);
  for (int j = 0; j < 66; ++j) y[j] = 0.45 * std::sin(j + 1.0);
  const FieldSample smp = sample_fields(spec, y, {});
  for (SpaceKind kind : {SpaceKind::NonconformingCR, SpaceKind::ConformingP1}) {
    const FemSystem sys = assemble(mesh, coefficients(smp), kind);
    const Eigen::SparseMatrix<double> d = sys.A - Eigen::SparseMatrix<double>(sys.A.transpose());
    if (d.squaredNorm() != 0.0) {
      why = "asymmetry " + num(d.squaredNorm());
      return false;
    }
  }
  why = "A == A^T bitwise on a jittered mesh, variable coefficients";
  return true;
}

bool prop_midpoint_jump(std::string& why) {
  const TriMesh mesh = make_structured_mesh({0, 0, 1, 1}, 8, 0.2, 3);
  const FemSystem sys = assemble(mesh, constant_coefficients(1.0, 1000.0),
                                 SpaceKind::NonconformingCR);
  FemSystem loaded = sys;
  loaded.rhs = assemble_load(mesh, sys.dofs, [](double x1, double x2) {
    return std::array<double, 2>{1.0 - x2 * x2, 2.0 * x1 - 20.0};
  });
  const Preconditioner pre =
      build_preconditioner(mesh, SpaceKind::NonconformingCR, 1000.0);
  const PcgSolution sol = pcg_solve(loaded, pre);
  const double jump = max_midpoint_jump(mesh, sys.dofs, sol.u);
  why = "solution midpoint jump " + num(jump);
  return jump <= 1e-12;
}

bool prop_divergence_preservation(std::string& why) {
  const TriMesh mesh = make_structured_mesh({0, 0, 1, 1}, 16);
  const DofMap dofs = build_dof_map(mesh, SpaceKind::NonconformingCR);
  const Eigen::VectorXd proj = project_cr(mesh, dofs, [](double x1, double x2) {
    return std::array<double, 2>{x1 * x1, -2.0 * x1 * x2};  // divergence-free
  });
  const Eigen::VectorXd div = element_divergence(mesh, dofs, proj);
  double worst = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    bool interior = true;
    for (int e : mesh.triangle_edges[t])
      interior = interior && !mesh.edge_is_boundary[e];
    if (interior) worst = std::max(worst, std::abs(div[t]));
  }
  why = "projected div-free field keeps |div| <= " + num(worst);
  return worst <= 1e-12;
}

bool prop_form_equivalence(std::string& why) {
  // smooth fields vanishing on the boundary of the unit square
  auto du = [](double x, double yv) {
    return std::array<double, 4>{
        kPi * std::cos(kPi * x) * std::sin(kPi * yv),
        kPi * std::sin(kPi * x) * std::cos(kPi * yv),
        kPi * std::cos(kPi * x) * std::sin(2 * kPi * yv),
        2 * kPi * std::sin(kPi * x) * std::cos(2 * kPi * yv)};
  };
  auto dv = [](double x, double yv) {
    return std::array<double, 4>{
        2 * kPi * std::cos(2 * kPi * x) * std::sin(kPi * yv),
        kPi * std::sin(2 * kPi * x) * std::cos(kPi * yv),
        (1 - 2 * x) * yv * (1 - yv), x * (1 - x) * (1 - 2 * yv)};
  };
  auto u2 = [](double x, double yv) {
    return std::sin(kPi * x) * std::sin(2 * kPi * yv);
  };
  auto v2 = [](double x, double yv) { return x * (1 - x) * yv * (1 - yv); };
  auto mu = [](double x, double yv) { return 1.0 + 0.5 * x + yv / 3.0; };
  const double mu_x = 0.5, mu_y = 1.0 / 3.0;
  auto lam = [](double x, double) { return 10.0 * (1.0 + 0.5 * std::sin(2 * kPi * x)); };

  const TriMesh mesh = make_structured_mesh({0, 0, 1, 1}, 32);
  const QuadRule& rule = triangle_quadrature(6);
  double strain = 0.0, symmetric = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = triangle_area(mesh, t);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      double x = 0.0, yv = 0.0;
      for (int i = 0; i < 3; ++i) {
        x += rule.bary[q][i] * mesh.vertices[tri[i]][0];
        yv += rule.bary[q][i] * mesh.vertices[tri[i]][1];
      }
      const auto gu = du(x, yv);
      const auto gv = dv(x, yv);
      const double divu = gu[0] + gu[3], divv = gv[0] + gv[3];
      const double m = mu(x, yv), l = lam(x, yv);
      const double eps_dot = gu[0] * gv[0] + gu[3] * gv[3] +
                             0.5 * (gu[1] + gu[2]) * (gv[1] + gv[2]);
      const double frob =
          gu[0] * gv[0] + gu[1] * gv[1] + gu[2] * gv[2] + gu[3] * gv[3];
      const double curl_u1 = -mu_x * gu[1] + mu_y * gu[0];
      const double curl_v1 = -mu_x * gv[1] + mu_y * gv[0];
      const double w = area * rule.weights[q];
      strain += w * (2.0 * m * eps_dot + l * divu * divv);
      symmetric += w * (m * frob + (m + l) * divu * divv +
                        curl_u1 * v2(x, yv) + curl_v1 * u2(x, yv));
    }
  }
  const double rel = std::abs(strain - symmetric) / std::max(1.0, std::abs(strain));
  why = "|B_hat - B|/|B| = " + num(rel);
  return rel <= 1e-6;
}

bool prop_fft_vs_direct(std::string& why) {
  // default synthesis grids (256 values, 512 gradients)
  FieldSpec spec;
  spec.mu0 = "one_plus_x1_plus_x2";
  spec.lambda_hat0 = "one";
  spec.Lambda = 10.0;
  spec.s_mu = 40;
  spec.s_lambda = 66;
  std::vector<double> y(40), z(66);
  for (int j = 0; j < 40; ++j) y[j] = 0.4 * std::cos(2.0 * j + 1.0);
  for (int j = 0; j < 66; ++j) z[j] = 0.45 * std::sin(j + 1.0);
  const FieldSample smp = sample_fields(spec, y, z);

  double node_err = 0.0;
  const int m = spec.grid_m;
  for (int i = 0; i <= m; i += 7)
    for (int j = 0; j <= m; j += 9) {
      const double x1 = double(i) / m, x2 = double(j) / m;
      node_err = std::max(node_err, std::abs(smp.mu(x1, x2) - smp.mu_direct(x1, x2)));
      node_err =
          std::max(node_err, std::abs(smp.lambda(x1, x2) - smp.lambda_direct(x1, x2)));
    }
  double off_err = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double x1 = 0.013 + 0.024 * i, x2 = 0.977 - 0.0241 * i;
    off_err = std::max(off_err, std::abs(smp.mu(x1, x2) - smp.mu_direct(x1, x2)));
    off_err =
        std::max(off_err, std::abs(smp.lambda(x1, x2) - smp.lambda_direct(x1, x2)));
  }
  why = "grid-node err " + num(node_err) + ", off-grid err " + num(off_err);
  return node_err <= 1e-12 && off_err <= 1e-6;
}

bool prop_equidistribution(std::string& why) {
  for (int m = 2; m <= 10; ++m) {
    const LatticeRule rule = load_genvec(genvec_path(kGenvec, 2, m, 2));
    const Eigen::MatrixXd pts = base_lattice_points(rule);
    const long expected = 1L << (m - 1);
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
      long low = 0;
      for (Eigen::Index r = 0; r < pts.rows(); ++r)
        if (pts(r, c) < 0.5) ++low;
      if (low != expected || pts.rows() - low != expected) {
        why = "m=" + std::to_string(m) + " col " + std::to_string(c) + ": " +
              std::to_string(low) + " points in the lower half";
        return false;
      }
    }
  }
  why = "each base coordinate splits 2^m points exactly in half, m = 2..10";
  return true;
}

bool prop_richardson(std::string& why) {
  std::vector<double> vals;
  for (int l = 0; l < 4; ++l) {
    const double h = std::pow(0.5, l);
    vals.push_back(0.75 + 2.0 * h * h - 0.5 * std::pow(h, 4) + 3.0 * std::pow(h, 6));
  }
  const RichardsonResult r = richardson_extrapolate(vals);
  const double err = std::abs(r.value - 0.75);
  why = "even-power expansion recovered to " + num(err);
  return err <= 1e-12 && r.monotone && r.depth == 3;
}

}  // namespace

int main() {
  std::vector<Criterion> results;

  // ---- example-1 study feeds criteria 1 and 2 -------------------------------
  RunConfig ex1 = default_config("ex1", "desk");
  ex1.genvec_dir = kGenvec;
  const double t0 = now_seconds();
  const ExperimentReport rep1 = run_example1(ex1);
  const double ex1_seconds = now_seconds() - t0;

  {
    const double l2 = rep1.series.at("l2_rate_cr_lam1").back();
    const double h1 = rep1.series.at("h1_rate_cr_lam1").back();
    const bool pass = in_window(l2, 1.90, 2.10) && in_window(h1, 0.95, 1.05) &&
                      ex1_seconds <= 180.0;
    results.push_back({1, pass,
                       "L2 rate " + num(l2) + " in [1.90,2.10], H1 rate " + num(h1) +
                           " in [0.95,1.05], " + num(ex1_seconds) + " s <= 180 s"});
  }
  {
    const auto& l2_soft = rep1.series.at("l2_err_cr_lam1");
    const auto& l2_hard = rep1.series.at("l2_err_cr_lam1000");
    const auto& h1_soft = rep1.series.at("h1_err_cr_lam1");
    const auto& h1_hard = rep1.series.at("h1_err_cr_lam1000");
    double worst = 0.0;
    for (std::size_t l = 0; l < l2_soft.size(); ++l) {
      worst = std::max(worst, std::abs(l2_hard[l] - l2_soft[l]) / l2_soft[l]);
      worst = std::max(worst, std::abs(h1_hard[l] - h1_soft[l]) / h1_soft[l]);
    }
    const double ratio =
        rep1.series.at("l2_err_p1_lam1000")[1] / rep1.series.at("l2_err_cr_lam1000")[1];
    const bool pass = worst <= 0.20 && ratio >= 10.0;
    results.push_back({2, pass,
                       "max level drift " + num(100.0 * worst) +
                           "% <= 20%, conforming/nonconforming L2 ratio " +
                           num(ratio) + " >= 10"});
  }

  // ---- criterion 3: example-2 QMC and MC slopes ------------------------------
  {
    bool pass = true;
    std::string detail;
    for (double Lambda : {1.0, 1000.0}) {
      const ExperimentReport q = run_qmc_study(qmc_config("ex2", Lambda, "combined"));
      const ExperimentReport m = run_qmc_study(qmc_config("ex2", Lambda, "mc"));
      const double qs = q.scalars.at("ls_slope");
      const double ms = m.scalars.at("ls_slope");
      pass = pass && in_window(qs, -2.5, -1.5) && in_window(ms, -0.8, -0.2);
      if (!detail.empty()) detail += "; ";
      detail += "Lambda " + num(Lambda) + ": qmc " + num(qs) + " in [-2.5,-1.5], mc " +
                num(ms) + " in [-0.8,-0.2]";
    }
    results.push_back({3, pass, detail});
  }

  // ---- criterion 4: examples 3 and 4 ----------------------------------------
  {
    const ExperimentReport r3 = run_qmc_study(qmc_config("ex3", 1.0, "combined"));
    const double s3 = r3.scalars.at("ls_slope");

    const ExperimentReport r4 = run_qmc_study(qmc_config("ex4", 1.0, "combined"));
    // first pairwise rate exempt: refit the slope without the first point
    const auto& errs = r4.series.at("error");
    const auto& ns = r4.series.at("n");
    const RateFit tail_fit =
        fit_rate(std::vector<double>(errs.begin() + 1, errs.end()),
                 std::vector<double>(ns.begin() + 1, ns.end()));
    const double s4 = tail_fit.ls_slope;
    const bool pass = in_window(s3, -2.5, -1.5) && in_window(s4, -2.5, -1.5);
    results.push_back({4, pass,
                       "ex3 slope " + num(s3) + ", ex4 slope " + num(s4) +
                           " (first pair exempt), window [-2.5,-1.5]"});
  }

  // ---- criterion 5: property suite -------------------------------------------
  {
    struct Prop {
      const char* name;
      bool (*fn)(std::string&);
    };
    const Prop props[] = {
        {"symmetry", prop_exact_symmetry},
        {"midpoint-jump", prop_midpoint_jump},
        {"div-preservation", prop_divergence_preservation},
        {"form-equivalence", prop_form_equivalence},
        {"fft-vs-direct", prop_fft_vs_direct},
        {"equidistribution", prop_equidistribution},
        {"richardson", prop_richardson},
    };
    bool pass = true;
    std::string detail;
    for (const auto& p : props) {
      std::string why;
      const bool ok = p.fn(why);
      pass = pass && ok;
      if (!ok) {
        if (!detail.empty()) detail += "; ";
        detail += std::string(p.name) + ": " + why;
      }
    }
    if (pass) detail = "7/7 properties hold";
    results.push_back({5, pass, detail});
  }

  // ---- criterion 6: solver contract -------------------------------------------
  {
    FieldSpec spec;
    spec.mu0 = "one_plus_x1_plus_x2";
    spec.lambda_hat0 = "one";
    spec.s_lambda = 66;
    spec.grid_m = 64;
    spec.grid_m_grad = 128;
    const LatticeRule rule = load_genvec(genvec_path(kGenvec, 2, 4, 2));
    PointSet ps = combined_nodes(rule, 0, 66);
    shift_center(ps.pts);

    int worst_iters = 0;
    double worst_gap = 0.0;
    bool pass = true;
    for (double Lambda : {1.0, 1000.0}) {
      spec.Lambda = Lambda;
      std::vector<TriMesh> meshes;
      meshes.push_back(make_structured_mesh({0, 0, 1, 1}, 4));
      for (int l = 1; l < 4; ++l) meshes.push_back(refine_uniform(meshes.back()));
      for (int node = 0; node < 2; ++node) {
        std::vector<double> z(66);
        for (int j = 0; j < 66; ++j) z[j] = ps.pts(node, j);
        const FieldSample smp = sample_fields(spec, {}, z);
        for (std::size_t l = 0; l < meshes.size(); ++l) {
          FemSystem sys =
              assemble(meshes[l], coefficients(smp), SpaceKind::NonconformingCR);
          sys.rhs = assemble_load(meshes[l], sys.dofs, [](double x1, double x2) {
            return std::array<double, 2>{1.0 - x2 * x2, 2.0 * x1 - 20.0};
          });
          const Preconditioner pre = build_preconditioner(
              meshes[l], SpaceKind::NonconformingCR, Lambda);
          const PcgSolution sol = pcg_solve(sys, pre, 1e-10, 500);
          worst_iters = std::max(worst_iters, sol.stats.iterations);
          pass = pass && sol.stats.iterations <= 30;
          if (l + 1 == meshes.size()) {
            const Eigen::VectorXd ud = direct_solve(sys);
            const double lp = functional_average_u2(meshes[l], sys.dofs, sol.u);
            const double ld = functional_average_u2(meshes[l], sys.dofs, ud);
            const double gap = std::abs(lp - ld) / std::max(1.0, std::abs(ld));
            worst_gap = std::max(worst_gap, gap);
            pass = pass && gap <= 1e-8;
          }
        }
      }
    }
    results.push_back({6, pass,
                       "max PCG iterations " + std::to_string(worst_iters) +
                           " <= 30 at 1e-10, pcg-vs-direct gap " + num(worst_gap) +
                           " <= 1e-8"});
  }

  // ---- criterion 7: truncation slope ------------------------------------------
  {
    RunConfig tr = default_config("truncation", "desk");
    tr.genvec_dir = kGenvec;
    const ExperimentReport rep = run_truncation_study(tr);
    const double slope = rep.scalars.at("ls_slope");
    results.push_back({7, slope <= -0.7,
                       "truncation error slope " + num(slope) + " <= -0.7"});
  }

  // ---- criterion 8: determinism across worker counts ---------------------------
  {
    RunConfig base = qmc_config("ex2", 1.0, "combined");
    base.n0 = 2;
    base.levels = 3;
    base.n_list = {16, 32};
    base.n_ref = 64;
    RunConfig wide = base;
    wide.workers = 4;
    wide.out_dir = "elsewhere";
    const ExperimentReport ra = run_qmc_study(base);
    const ExperimentReport rb = run_qmc_study(wide);
    const ExperimentReport rc = run_qmc_study(base);  // repeat, same settings
    const bool pass = ra.csv == rb.csv && ra.manifest == rb.manifest &&
                      ra.csv == rc.csv && ra.manifest == rc.manifest;
    results.push_back({8, pass,
                       pass ? std::string("report bytes identical at 1 and 4 "
                                          "workers and across repeats")
                            : std::string("report bytes differ")});
  }

  int failures = 0;
  for (const auto& r : results) {
    if (!r.pass) ++failures;
    std::printf("criterion %d: %s (%s)\n", r.id, r.pass ? "PASS" : "FAIL",
                r.detail.c_str());
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", results.size() - failures,
              results.size());
  return failures == 0 ? 0 : 1;
}

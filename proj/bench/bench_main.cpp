// Timing comparison of the fast kernels against their serial reference
// implementations: spectral field synthesis vs direct summation, and the
// OpenMP sample pipeline vs the single-worker loop. The reference paths stay
// in the library for exactly this purpose, so regressions are visible.

#include <omp.h>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "elastuq/experiments.hpp"
#include "elastuq/fem.hpp"
#include "elastuq/fields.hpp"
#include "elastuq/mesh.hpp"
#include "elastuq/qmc.hpp"
#include "elastuq/solver.hpp"

using namespace elastuq;

namespace {

double seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void bench_field_synthesis(int s, int grid_m) {
  std::vector<double> coeffs(s);
  for (int j = 0; j < s; ++j) coeffs[j] = 0.45 * std::sin(j + 1.0);

  double fast = 0.0, direct = 0.0;
  SineGrid g;
  fast = seconds([&] { g = eval_field_grid(coeffs, 2.0, grid_m); });

  Eigen::MatrixXd ref(grid_m + 1, grid_m + 1);
  direct = seconds([&] {
    for (int i = 0; i <= grid_m; ++i)
      for (int j = 0; j <= grid_m; ++j)
        ref(i, j) = eval_field_direct(coeffs, 2.0, double(i) / grid_m,
                                      double(j) / grid_m);
  });

  double err = 0.0;
  for (int i = 0; i <= grid_m; ++i)
    for (int j = 0; j <= grid_m; ++j)
      err = std::max(err, std::abs(g.v(i, j) - ref(i, j)));

  std::printf("field synthesis   s=%-4d grid=%-4d  transform %8.4f s   direct "
              "%8.4f s   speedup %6.1fx   max diff %.2e\n",
              s, grid_m, fast, direct, direct / fast, err);
}

struct NodeBatch {
  TriMesh mesh;
  Eigen::VectorXd rhs;
  Preconditioner pre;
  FieldSpec spec;
  Eigen::MatrixXd pts;
};

NodeBatch make_batch(int n_cells, int s, int m, const std::string& genvec_dir) {
  NodeBatch b;
  b.mesh = make_structured_mesh({0, 0, 1, 1}, n_cells);
  b.spec.mu0 = "one_plus_x1_plus_x2";
  b.spec.lambda_hat0 = "one";
  b.spec.Lambda = 1000.0;
  b.spec.s_lambda = s;
  b.spec.grid_m = 64;
  b.spec.grid_m_grad = 128;
  const DofMap dofs = build_dof_map(b.mesh, SpaceKind::NonconformingCR);
  b.rhs = assemble_load(b.mesh, dofs, [](double x1, double x2) {
    return std::array<double, 2>{1.0 - x2 * x2, 2.0 * x1 - 20.0};
  });
  b.pre = build_preconditioner(b.mesh, SpaceKind::NonconformingCR, b.spec.Lambda);
  PointSet ps = combined_nodes(load_genvec(genvec_path(genvec_dir, 2, m, 2)), 0, s);
  shift_center(ps.pts);
  b.pts = std::move(ps.pts);
  return b;
}

std::vector<double> run_nodes(const NodeBatch& b, int workers) {
  const int n = static_cast<int>(b.pts.rows());
  std::vector<double> vals(n);
  auto body = [&](int i) {
    std::vector<double> z(b.pts.cols());
    for (int j = 0; j < int(z.size()); ++j) z[j] = b.pts(i, j);
    const FieldSample smp = sample_fields(b.spec, {}, z);
    FemSystem sys =
        assemble(b.mesh, coefficients(smp), SpaceKind::NonconformingCR);
    sys.rhs = b.rhs;
    const PcgSolution sol = pcg_solve(sys, b.pre);
    vals[i] = functional_average_u2(b.mesh, sys.dofs, sol.u);
  };
  if (workers > 1) {
#pragma omp parallel for num_threads(workers) schedule(static)
    for (int i = 0; i < n; ++i) body(i);
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }
  return vals;
}

void bench_node_pipeline(int n_cells, int s, int m, int workers,
                         const std::string& genvec_dir) {
  const NodeBatch b = make_batch(n_cells, s, m, genvec_dir);
  std::vector<double> serial_vals, parallel_vals;
  const double serial = seconds([&] { serial_vals = run_nodes(b, 1); });
  const double parallel = seconds([&] { parallel_vals = run_nodes(b, workers); });
  double diff = 0.0;
  for (std::size_t i = 0; i < serial_vals.size(); ++i)
    diff = std::max(diff, std::abs(serial_vals[i] - parallel_vals[i]));
  std::printf("sample pipeline   mesh=%-3d nodes=%-4ld  serial %8.3f s   %d "
              "workers %8.3f s   speedup %5.2fx   max diff %.1e\n",
              n_cells, long(b.pts.rows()), serial, workers, parallel,
              serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  Eigen::setNbThreads(1);
  std::string genvec_dir = "data/genvec";
  int workers = omp_get_max_threads();
  int m = 6;
  int n_cells = 16;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&] { return std::stoi(argv[++i]); };
    if (a == "--genvec-dir" && i + 1 < argc)
      genvec_dir = argv[++i];
    else if (a == "--workers" && i + 1 < argc)
      workers = next();
    else if (a == "--m" && i + 1 < argc)
      m = next();
    else if (a == "--mesh" && i + 1 < argc)
      n_cells = next();
    else {
      std::fprintf(stderr,
                   "usage: %s [--genvec-dir DIR] [--workers W] [--m M] "
                   "[--mesh N]\n",
                   argv[0]);
      return 1;
    }
  }

  bench_field_synthesis(66, 256);
  bench_field_synthesis(253, 256);
  bench_node_pipeline(n_cells, 66, m, workers, genvec_dir);
  return 0;
}

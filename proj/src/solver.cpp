#include "elastuq/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "elastuq/common.hpp"

namespace elastuq {

std::uint64_t mesh_signature(const TriMesh& mesh) {
  std::uint64_t h = fnv1a(mesh.vertices.data(),
                          mesh.vertices.size() * sizeof(mesh.vertices[0]));
  h = fnv1a(mesh.triangles.data(), mesh.triangles.size() * sizeof(mesh.triangles[0]),
            h);
  return h;
}

Preconditioner build_preconditioner(const TriMesh& mesh, SpaceKind kind,
                                    double Lambda, int quad_degree) {
  if (Lambda < 1.0)
    throw ConfigError("solver: Lambda must be >= 1, got " + std::to_string(Lambda));
  Preconditioner p;
  p.mesh_sig = mesh_signature(mesh);
  p.kind = kind;
  p.Lambda = Lambda;
  const FemSystem sys =
      assemble(mesh, constant_coefficients(1.0, Lambda), kind, quad_degree);
  p.n_dofs = sys.dofs.n_dofs();
  p.llt = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
  p.llt->compute(sys.A);
  if (p.llt->info() != Eigen::Success)
    throw ConfigError(
        "solver: constant-coefficient factorization failed (matrix not positive "
        "definite)");
  return p;
}

PcgSolution pcg_solve(const FemSystem& system, const Preconditioner& precond,
                      double tol, int max_iter) {
  const int n = system.dofs.n_dofs();
  if (precond.n_dofs != n || precond.kind != system.dofs.kind)
    throw ConfigError("solver: preconditioner does not match the system layout");
  if (system.rhs.size() != n)
    throw ConfigError("solver: rhs not assembled (size mismatch)");

  const auto t0 = std::chrono::steady_clock::now();
  PcgSolution out;
  out.u = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd r = system.rhs;
  Eigen::VectorXd z = precond.apply(r);
  double rz = r.dot(z);
  if (rz < 0.0)
    throw SolveError("solver: preconditioner application lost definiteness", {});
  const double b_norm = std::sqrt(rz);
  if (b_norm == 0.0) {
    out.history = {0.0};
    out.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }
  out.history = {1.0};

  Eigen::VectorXd p = z;
  Eigen::VectorXd Ap(n);
  bool converged = false;
  for (int k = 1; k <= max_iter; ++k) {
    Ap.noalias() = system.A * p;
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0)
      throw SolveError(
          "solver: direction of nonpositive curvature at iteration " +
              std::to_string(k) + " (matrix not positive definite)",
          out.history);
    const double alpha = rz / pAp;
    out.u += alpha * p;
    r -= alpha * Ap;
    z = precond.apply(r);
    const double rz_new = r.dot(z);
    const double rel = std::sqrt(std::max(rz_new, 0.0)) / b_norm;
    out.history.push_back(rel);
    out.stats.iterations = k;
    if (rel <= tol) {
      converged = true;
      break;
    }
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (!converged)
    throw SolveError("solver: no convergence to tol " + std::to_string(tol) +
                         " within " + std::to_string(max_iter) + " iterations",
                     out.history);
  out.stats.final_rel_residual = out.history.back();
  out.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

Eigen::VectorXd direct_solve(const FemSystem& system) {
  if (system.rhs.size() != system.dofs.n_dofs())
    throw ConfigError("solver: rhs not assembled (size mismatch)");
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(system.A);
  if (llt.info() != Eigen::Success)
    throw SolveError("solver: sparse Cholesky factorization failed", {});
  return llt.solve(system.rhs);
}

}  // namespace elastuq

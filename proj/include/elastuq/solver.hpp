#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cstdint>
#include <memory>
#include <vector>

#include "elastuq/fem.hpp"
#include "elastuq/mesh.hpp"

namespace elastuq {

// Fingerprint of the mesh geometry and connectivity, used to key
// preconditioner reuse.
std::uint64_t mesh_signature(const TriMesh& mesh);

// Sparse Cholesky factorization (AMD-ordered) of the constant-coefficient
// operator with mu = 1, lambda = Lambda on a fixed mesh and space. Immutable
// once built; shared read-only across concurrent solves on the same level.
struct Preconditioner {
  std::uint64_t mesh_sig = 0;
  SpaceKind kind = SpaceKind::NonconformingCR;
  double Lambda = 1.0;
  int n_dofs = 0;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt;

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const { return llt->solve(r); }
};

// Throws ConfigError if the factorization fails (loss of positive
// definiteness). Lambda must be >= 1.
Preconditioner build_preconditioner(const TriMesh& mesh, SpaceKind kind,
                                    double Lambda, int quad_degree = 4);

struct SolveStats {
  int iterations = 0;
  double final_rel_residual = 0.0;
  double wall_seconds = 0.0;  // kept out of report files; timing is advisory
};

struct PcgSolution {
  Eigen::VectorXd u;
  SolveStats stats;
  // history[k] = preconditioned relative residual after k iterations,
  // history[0] = 1 for nonzero rhs (initial guess is zero)
  std::vector<double> history;
};

// Preconditioned conjugate gradients with stopping criterion
//   sqrt(r' P^-1 r / b' P^-1 b) <= tol.
// rhs = 0 returns the zero solution with 0 iterations. Non-convergence within
// max_iter throws SolveError carrying the residual history; a direction of
// nonpositive curvature does too (the matrix lost definiteness).
PcgSolution pcg_solve(const FemSystem& system, const Preconditioner& precond,
                      double tol = 1e-10, int max_iter = 500);

// Sparse Cholesky solve of the variable-coefficient matrix itself; the
// reference path PCG is checked against.
Eigen::VectorXd direct_solve(const FemSystem& system);

}  // namespace elastuq

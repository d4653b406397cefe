#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "elastuq/fields.hpp"
#include "elastuq/mesh.hpp"

namespace elastuq {

enum class SpaceKind { ConformingP1, NonconformingCR };

using VecFn = std::function<std::array<double, 2>(double, double)>;
// gradient as [d1u1, d2u1, d1u2, d2u2]
using GradFn = std::function<std::array<double, 4>(double, double)>;

// Scalar degrees of freedom sit on mesh entities (vertices for P1, edge
// midpoints for CR); boundary entities are eliminated (homogeneous Dirichlet).
// Vector dof index = 2 * free_slot + component.
struct DofMap {
  SpaceKind kind = SpaceKind::NonconformingCR;
  int n_entities = 0;
  int n_free = 0;
  std::vector<int> free_of_entity;  // -1 when constrained
  std::vector<int> entity_of_free;
  int n_dofs() const { return 2 * n_free; }
};

DofMap build_dof_map(const TriMesh& mesh, SpaceKind kind);

// Symmetric triangle quadrature, weights normalized to sum to one:
// integral over K = |K| * sum_q w_q f(x_q). Degrees 2, 4, 6 are provided.
struct QuadRule {
  int degree = 0;
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;
};
const QuadRule& triangle_quadrature(int degree);

// Pointwise coefficient access used by assembly.
struct CoefficientField {
  std::function<double(double, double)> mu;
  std::function<double(double, double)> lambda;
  std::function<std::array<double, 2>(double, double)> grad_mu;
};

CoefficientField constant_coefficients(double mu, double lambda);
// View over a sampled field; the sample must outlive the returned object.
CoefficientField coefficients(const FieldSample& sample);

struct FemSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd rhs;
  DofMap dofs;
  int quad_degree = 4;
};

// Stiffness matrix of the form
//   integral of mu grad(u):grad(v) + (mu+lambda) div(u) div(v)
//              + grad(mu) . (K_{u1} v2 + K_{v1} u2)
// with K_g = (-d2 g, d1 g). The curl-correction term restores symmetry with
// variable mu; it vanishes identically for constant mu. rhs is zero-sized
// until assemble_load fills it.
FemSystem assemble(const TriMesh& mesh, const CoefficientField& coeff,
                   SpaceKind kind, int quad_degree = 4);

Eigen::VectorXd assemble_load(const TriMesh& mesh, const DofMap& dofs, const VecFn& f,
                              int quad_degree = 4);

// integral of the second displacement component over the domain, exact for
// piecewise-affine functions (midpoint values for CR, vertex values for P1).
double functional_average_u2(const TriMesh& mesh, const DofMap& dofs,
                             const Eigen::VectorXd& u);

// Edge-midpoint interpolant: dof value = average of v over the edge
// (three-point Gauss per edge); boundary dofs are set to zero.
Eigen::VectorXd project_cr(const TriMesh& mesh, const DofMap& dofs, const VecFn& v);

struct BrokenNorms {
  double l2 = 0.0;
  double h1 = 0.0;      // broken H1 seminorm
  double energy = 0.0;  // sqrt of sum_K int mu |grad v|^2 + (mu+lambda) (div v)^2
};
BrokenNorms broken_norms(const TriMesh& mesh, const DofMap& dofs,
                         const Eigen::VectorXd& u, const CoefficientField& coeff,
                         int quad_degree = 4);

// Max over interior edges of |u_from_left - u_from_right| at the midpoint and
// over boundary edges of the midpoint trace (componentwise max-abs).
double max_midpoint_jump(const TriMesh& mesh, const DofMap& dofs,
                         const Eigen::VectorXd& u);

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;  // broken H1 seminorm of the error
};
ErrorNorms error_norms(const TriMesh& mesh, const DofMap& dofs,
                       const Eigen::VectorXd& u, const VecFn& exact,
                       const GradFn& exact_grad, int quad_degree = 6);

// Per-element divergence (constant on each triangle for P1/CR).
Eigen::VectorXd element_divergence(const TriMesh& mesh, const DofMap& dofs,
                                   const Eigen::VectorXd& u);

// "row col value" per nonzero, highest precision, for external inspection.
void write_matrix_coo(std::ostream& os, const Eigen::SparseMatrix<double>& A);

}  // namespace elastuq

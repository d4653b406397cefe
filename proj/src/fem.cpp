#include "elastuq/fem.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "elastuq/common.hpp"

namespace elastuq {

namespace {

struct ElementGeometry {
  std::array<double, 2> p[3];
  std::array<double, 2> grad_lambda[3];
  double area = 0.0;
};

ElementGeometry element_geometry(const TriMesh& mesh, int t) {
  ElementGeometry g;
  for (int i = 0; i < 3; ++i) g.p[i] = mesh.vertices[mesh.triangles[t][i]];
  const double det = (g.p[1][0] - g.p[0][0]) * (g.p[2][1] - g.p[0][1]) -
                     (g.p[1][1] - g.p[0][1]) * (g.p[2][0] - g.p[0][0]);
  g.area = 0.5 * det;
  for (int i = 0; i < 3; ++i) {
    const auto& a = g.p[(i + 1) % 3];
    const auto& b = g.p[(i + 2) % 3];
    g.grad_lambda[i] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
  }
  return g;
}

// scalar basis value at a barycentric point
inline double basis_value(SpaceKind kind, int i, const std::array<double, 3>& bc) {
  return kind == SpaceKind::ConformingP1 ? bc[i] : 1.0 - 2.0 * bc[i];
}

inline std::array<double, 2> basis_grad(SpaceKind kind, const ElementGeometry& g,
                                        int i) {
  const double f = kind == SpaceKind::ConformingP1 ? 1.0 : -2.0;
  return {f * g.grad_lambda[i][0], f * g.grad_lambda[i][1]};
}

inline int local_entity(const TriMesh& mesh, SpaceKind kind, int t, int i) {
  return kind == SpaceKind::ConformingP1 ? mesh.triangles[t][i]
                                         : mesh.triangle_edges[t][i];
}

// 2x2 gradient of the FE function on element t: G[c][a] = d_a u_c, constant
// per element. Missing (constrained) dofs contribute zero.
void element_gradient(const TriMesh& mesh, const DofMap& dofs,
                      const Eigen::VectorXd& u, int t, const ElementGeometry& g,
                      double G[2][2], double coef[3][2]) {
  for (int c = 0; c < 2; ++c) G[0][c] = G[1][c] = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int slot = dofs.free_of_entity[local_entity(mesh, dofs.kind, t, i)];
    for (int c = 0; c < 2; ++c) {
      const double v = slot >= 0 ? u[2 * slot + c] : 0.0;
      coef[i][c] = v;
      const auto gi = basis_grad(dofs.kind, g, i);
      G[c][0] += v * gi[0];
      G[c][1] += v * gi[1];
    }
  }
}

}  // namespace

DofMap build_dof_map(const TriMesh& mesh, SpaceKind kind) {
  DofMap d;
  d.kind = kind;
  if (kind == SpaceKind::NonconformingCR) {
    d.n_entities = mesh.n_edges();
    d.free_of_entity.assign(d.n_entities, -1);
    for (int e = 0; e < mesh.n_edges(); ++e)
      if (!mesh.edge_is_boundary[e]) {
        d.free_of_entity[e] = d.n_free++;
        d.entity_of_free.push_back(e);
      }
  } else {
    d.n_entities = mesh.n_vertices();
    std::vector<std::uint8_t> on_boundary(mesh.n_vertices(), 0);
    for (int e = 0; e < mesh.n_edges(); ++e)
      if (mesh.edge_is_boundary[e]) {
        on_boundary[mesh.edges[e][0]] = 1;
        on_boundary[mesh.edges[e][1]] = 1;
      }
    d.free_of_entity.assign(d.n_entities, -1);
    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (!on_boundary[v]) {
        d.free_of_entity[v] = d.n_free++;
        d.entity_of_free.push_back(v);
      }
  }
  return d;
}

const QuadRule& triangle_quadrature(int degree) {
  static const QuadRule deg2 = [] {
    QuadRule q;
    q.degree = 2;
    q.bary = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    q.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return q;
  }();
  static const QuadRule deg4 = [] {
    QuadRule q;
    q.degree = 4;
    const double a1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322;
    for (int i = 0; i < 3; ++i) {
      std::array<double, 3> b1{a1, a1, a1}, b2{a2, a2, a2};
      b1[i] = 1.0 - 2.0 * a1;
      b2[i] = 1.0 - 2.0 * a2;
      q.bary.push_back(b1);
      q.weights.push_back(w1);
      q.bary.push_back(b2);
      q.weights.push_back(w2);
    }
    return q;
  }();
  static const QuadRule deg6 = [] {
    QuadRule q;
    q.degree = 6;
    const double a1 = 0.249286745170910, w1 = 0.116786275726379;
    const double a2 = 0.063089014491502, w2 = 0.050844906370207;
    for (int i = 0; i < 3; ++i) {
      std::array<double, 3> b1{a1, a1, a1}, b2{a2, a2, a2};
      b1[i] = 1.0 - 2.0 * a1;
      b2[i] = 1.0 - 2.0 * a2;
      q.bary.push_back(b1);
      q.weights.push_back(w1);
      q.bary.push_back(b2);
      q.weights.push_back(w2);
    }
    const double c1 = 0.310352451033785, c2 = 0.053145049844816;
    const double c3 = 1.0 - c1 - c2, w3 = 0.082851075618374;
    const double perms[6][3] = {{c1, c2, c3}, {c1, c3, c2}, {c2, c1, c3},
                                {c2, c3, c1}, {c3, c1, c2}, {c3, c2, c1}};
    for (const auto& p : perms) {
      q.bary.push_back({p[0], p[1], p[2]});
      q.weights.push_back(w3);
    }
    return q;
  }();
  switch (degree) {
    case 2:
      return deg2;
    case 4:
      return deg4;
    case 6:
      return deg6;
    default:
      throw ConfigError("fem: quadrature degree must be 2, 4, or 6");
  }
}

CoefficientField constant_coefficients(double mu, double lambda) {
  CoefficientField c;
  c.mu = [mu](double, double) { return mu; };
  c.lambda = [lambda](double, double) { return lambda; };
  c.grad_mu = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
  return c;
}

CoefficientField coefficients(const FieldSample& sample) {
  CoefficientField c;
  const FieldSample* s = &sample;
  c.mu = [s](double x1, double x2) { return s->mu(x1, x2); };
  c.lambda = [s](double x1, double x2) { return s->lambda(x1, x2); };
  c.grad_mu = [s](double x1, double x2) { return s->grad_mu(x1, x2); };
  return c;
}

FemSystem assemble(const TriMesh& mesh, const CoefficientField& coeff,
                   SpaceKind kind, int quad_degree) {
  const QuadRule& quad = triangle_quadrature(quad_degree);
  FemSystem sys;
  sys.dofs = build_dof_map(mesh, kind);
  sys.quad_degree = quad_degree;
  const int n = sys.dofs.n_dofs();
  sys.A.resize(n, n);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 36);

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    std::array<double, 2> bg[3];
    int slot[3];
    for (int i = 0; i < 3; ++i) {
      bg[i] = basis_grad(kind, g, i);
      slot[i] = sys.dofs.free_of_entity[local_entity(mesh, kind, t, i)];
    }

    double local[6][6] = {};
    for (std::size_t q = 0; q < quad.bary.size(); ++q) {
      const auto& bc = quad.bary[q];
      const double x1 = bc[0] * g.p[0][0] + bc[1] * g.p[1][0] + bc[2] * g.p[2][0];
      const double x2 = bc[0] * g.p[0][1] + bc[1] * g.p[1][1] + bc[2] * g.p[2][1];
      const double mu = coeff.mu(x1, x2);
      const double lam = coeff.lambda(x1, x2);
      const auto gmu = coeff.grad_mu(x1, x2);
      const double wq = quad.weights[q] * g.area;
      double phi[3];
      for (int i = 0; i < 3; ++i) phi[i] = basis_value(kind, i, bc);

      for (int li = 0; li < 6; ++li) {
        const int i = li / 2, c = li % 2;
        for (int lj = li; lj < 6; ++lj) {
          const int j = lj / 2, e = lj % 2;
          double val = (mu + lam) * bg[i][c] * bg[j][e];
          if (c == e) val += mu * (bg[i][0] * bg[j][0] + bg[i][1] * bg[j][1]);
          if (c == 1 && e == 0)
            val += (-gmu[0] * bg[j][1] + gmu[1] * bg[j][0]) * phi[i];
          if (c == 0 && e == 1)
            val += (-gmu[0] * bg[i][1] + gmu[1] * bg[i][0]) * phi[j];
          local[li][lj] += wq * val;
        }
      }
    }

    for (int li = 0; li < 6; ++li) {
      const int i = li / 2, c = li % 2;
      if (slot[i] < 0) continue;
      for (int lj = li; lj < 6; ++lj) {
        const int j = lj / 2, e = lj % 2;
        if (slot[j] < 0) continue;
        const int gi = 2 * slot[i] + c;
        const int gj = 2 * slot[j] + e;
        trips.emplace_back(gi, gj, local[li][lj]);
        if (lj != li) trips.emplace_back(gj, gi, local[li][lj]);
      }
    }
  }
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.A.makeCompressed();
  return sys;
}

Eigen::VectorXd assemble_load(const TriMesh& mesh, const DofMap& dofs, const VecFn& f,
                              int quad_degree) {
  const QuadRule& quad = triangle_quadrature(quad_degree);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs.n_dofs());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    for (std::size_t q = 0; q < quad.bary.size(); ++q) {
      const auto& bc = quad.bary[q];
      const double x1 = bc[0] * g.p[0][0] + bc[1] * g.p[1][0] + bc[2] * g.p[2][0];
      const double x2 = bc[0] * g.p[0][1] + bc[1] * g.p[1][1] + bc[2] * g.p[2][1];
      const auto fv = f(x1, x2);
      const double wq = quad.weights[q] * g.area;
      for (int i = 0; i < 3; ++i) {
        const int slot = dofs.free_of_entity[local_entity(mesh, dofs.kind, t, i)];
        if (slot < 0) continue;
        const double phi = basis_value(dofs.kind, i, bc);
        rhs[2 * slot] += wq * fv[0] * phi;
        rhs[2 * slot + 1] += wq * fv[1] * phi;
      }
    }
  }
  return rhs;
}

double functional_average_u2(const TriMesh& mesh, const DofMap& dofs,
                             const Eigen::VectorXd& u) {
  double acc = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double a = triangle_area(mesh, t) / 3.0;
    for (int i = 0; i < 3; ++i) {
      const int slot = dofs.free_of_entity[local_entity(mesh, dofs.kind, t, i)];
      if (slot >= 0) acc += a * u[2 * slot + 1];
    }
  }
  return acc;
}

Eigen::VectorXd project_cr(const TriMesh& mesh, const DofMap& dofs, const VecFn& v) {
  if (dofs.kind != SpaceKind::NonconformingCR)
    throw ConfigError("fem: project_cr needs the nonconforming space");
  // 3-point Gauss on [0,1], exact through degree 5
  const double xi = 0.5 * std::sqrt(0.6);
  const double gp[3] = {0.5 - xi, 0.5, 0.5 + xi};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dofs.n_dofs());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const int slot = dofs.free_of_entity[e];
    if (slot < 0) continue;
    const auto& a = mesh.vertices[mesh.edges[e][0]];
    const auto& b = mesh.vertices[mesh.edges[e][1]];
    double avg[2] = {0.0, 0.0};
    for (int q = 0; q < 3; ++q) {
      const auto fv =
          v(a[0] + gp[q] * (b[0] - a[0]), a[1] + gp[q] * (b[1] - a[1]));
      avg[0] += gw[q] * fv[0];
      avg[1] += gw[q] * fv[1];
    }
    u[2 * slot] = avg[0];
    u[2 * slot + 1] = avg[1];
  }
  return u;
}

BrokenNorms broken_norms(const TriMesh& mesh, const DofMap& dofs,
                         const Eigen::VectorXd& u, const CoefficientField& coeff,
                         int quad_degree) {
  const QuadRule& quad = triangle_quadrature(quad_degree);
  double l2 = 0.0, h1 = 0.0, en = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    double G[2][2], coef[3][2];
    element_gradient(mesh, dofs, u, t, g, G, coef);
    const double gsq =
        G[0][0] * G[0][0] + G[0][1] * G[0][1] + G[1][0] * G[1][0] + G[1][1] * G[1][1];
    const double div = G[0][0] + G[1][1];
    h1 += g.area * gsq;
    for (std::size_t q = 0; q < quad.bary.size(); ++q) {
      const auto& bc = quad.bary[q];
      const double x1 = bc[0] * g.p[0][0] + bc[1] * g.p[1][0] + bc[2] * g.p[2][0];
      const double x2 = bc[0] * g.p[0][1] + bc[1] * g.p[1][1] + bc[2] * g.p[2][1];
      const double wq = quad.weights[q] * g.area;
      double v1 = 0.0, v2 = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double phi = basis_value(dofs.kind, i, bc);
        v1 += coef[i][0] * phi;
        v2 += coef[i][1] * phi;
      }
      l2 += wq * (v1 * v1 + v2 * v2);
      const double mu = coeff.mu(x1, x2);
      const double lam = coeff.lambda(x1, x2);
      en += wq * (mu * gsq + (mu + lam) * div * div);
    }
  }
  return {std::sqrt(l2), std::sqrt(h1), std::sqrt(en)};
}

double max_midpoint_jump(const TriMesh& mesh, const DofMap& dofs,
                         const Eigen::VectorXd& u) {
  if (dofs.kind != SpaceKind::NonconformingCR)
    throw ConfigError("fem: midpoint jumps are defined for the nonconforming space");
  auto eval_at = [&](int t, const std::array<double, 2>& x, double out[2]) {
    const ElementGeometry g = element_geometry(mesh, t);
    // barycentric coordinates of x in triangle t
    const double det = 2.0 * g.area;
    std::array<double, 3> bc;
    bc[0] = ((g.p[1][1] - g.p[2][1]) * (x[0] - g.p[2][0]) +
             (g.p[2][0] - g.p[1][0]) * (x[1] - g.p[2][1])) /
            det;
    bc[1] = ((g.p[2][1] - g.p[0][1]) * (x[0] - g.p[2][0]) +
             (g.p[0][0] - g.p[2][0]) * (x[1] - g.p[2][1])) /
            det;
    bc[2] = 1.0 - bc[0] - bc[1];
    out[0] = out[1] = 0.0;
    for (int i = 0; i < 3; ++i) {
      const int slot = dofs.free_of_entity[mesh.triangle_edges[t][i]];
      const double phi = basis_value(dofs.kind, i, bc);
      if (slot >= 0) {
        out[0] += u[2 * slot] * phi;
        out[1] += u[2 * slot + 1] * phi;
      }
    }
  };
  double worst = 0.0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    double a[2] = {0.0, 0.0}, b[2] = {0.0, 0.0};
    eval_at(mesh.edge_to_triangles[e][0], mesh.edge_midpoints[e], a);
    if (!mesh.edge_is_boundary[e])
      eval_at(mesh.edge_to_triangles[e][1], mesh.edge_midpoints[e], b);
    worst = std::max(worst, std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])));
  }
  return worst;
}

ErrorNorms error_norms(const TriMesh& mesh, const DofMap& dofs,
                       const Eigen::VectorXd& u, const VecFn& exact,
                       const GradFn& exact_grad, int quad_degree) {
  const QuadRule& quad = triangle_quadrature(quad_degree);
  double l2 = 0.0, h1 = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    double G[2][2], coef[3][2];
    element_gradient(mesh, dofs, u, t, g, G, coef);
    for (std::size_t q = 0; q < quad.bary.size(); ++q) {
      const auto& bc = quad.bary[q];
      const double x1 = bc[0] * g.p[0][0] + bc[1] * g.p[1][0] + bc[2] * g.p[2][0];
      const double x2 = bc[0] * g.p[0][1] + bc[1] * g.p[1][1] + bc[2] * g.p[2][1];
      const double wq = quad.weights[q] * g.area;
      double v1 = 0.0, v2 = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double phi = basis_value(dofs.kind, i, bc);
        v1 += coef[i][0] * phi;
        v2 += coef[i][1] * phi;
      }
      const auto ex = exact(x1, x2);
      const auto eg = exact_grad(x1, x2);
      l2 += wq * ((v1 - ex[0]) * (v1 - ex[0]) + (v2 - ex[1]) * (v2 - ex[1]));
      const double d[4] = {G[0][0] - eg[0], G[0][1] - eg[1], G[1][0] - eg[2],
                           G[1][1] - eg[3]};
      h1 += wq * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3]);
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

Eigen::VectorXd element_divergence(const TriMesh& mesh, const DofMap& dofs,
                                   const Eigen::VectorXd& u) {
  Eigen::VectorXd div(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    double G[2][2], coef[3][2];
    element_gradient(mesh, dofs, u, t, g, G, coef);
    div[t] = G[0][0] + G[1][1];
  }
  return div;
}

void write_matrix_coo(std::ostream& os, const Eigen::SparseMatrix<double>& A) {
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  char buf[64];
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", long(it.row()), long(it.col()),
                    it.value());
      os << buf;
    }
}

}  // namespace elastuq

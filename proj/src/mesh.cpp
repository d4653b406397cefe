#include "elastuq/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace elastuq {

namespace {

double signed_area2(const std::array<double, 2>& a, const std::array<double, 2>& b,
                    const std::array<double, 2>& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

double edge_length(const TriMesh& m, int a, int b) {
  const double dx = m.vertices[a][0] - m.vertices[b][0];
  const double dy = m.vertices[a][1] - m.vertices[b][1];
  return std::sqrt(dx * dx + dy * dy);
}

// Rebuilds edge topology and h from vertices + triangles. Edge numbering is
// lexicographic on sorted vertex pairs.
void finalize_topology(TriMesh& m) {
  std::map<std::array<int, 2>, std::vector<int>> adj;
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri[(i + 1) % 3];
      int b = tri[(i + 2) % 3];
      if (a > b) std::swap(a, b);
      adj[{a, b}].push_back(t);
    }
  }
  m.edges.clear();
  m.edge_midpoints.clear();
  m.edge_is_boundary.clear();
  m.edge_to_triangles.clear();
  m.edges.reserve(adj.size());
  std::map<std::array<int, 2>, int> edge_index;
  for (const auto& [key, tris] : adj) {
    const int e = static_cast<int>(m.edges.size());
    edge_index[key] = e;
    m.edges.push_back(key);
    m.edge_midpoints.push_back({0.5 * (m.vertices[key[0]][0] + m.vertices[key[1]][0]),
                                0.5 * (m.vertices[key[0]][1] + m.vertices[key[1]][1])});
    if (tris.size() == 1) {
      m.edge_is_boundary.push_back(1);
      m.edge_to_triangles.push_back({tris[0], -1});
    } else if (tris.size() == 2) {
      m.edge_is_boundary.push_back(0);
      m.edge_to_triangles.push_back({tris[0], tris[1]});
    } else {
      throw std::runtime_error("mesh: edge shared by more than two triangles");
    }
  }
  m.triangle_edges.assign(m.n_triangles(), {-1, -1, -1});
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri[(i + 1) % 3];
      int b = tri[(i + 2) % 3];
      if (a > b) std::swap(a, b);
      m.triangle_edges[t][i] = edge_index.at({a, b});
    }
  }
  m.h = 0.0;
  for (const auto& e : m.edges) m.h = std::max(m.h, edge_length(m, e[0], e[1]));
}

}  // namespace

int TriMesh::n_interior_edges() const {
  int k = 0;
  for (auto f : edge_is_boundary) k += (f == 0);
  return k;
}

int TriMesh::n_boundary_edges() const { return n_edges() - n_interior_edges(); }

double triangle_area(const TriMesh& m, int t) {
  const auto& tri = m.triangles[t];
  return 0.5 * signed_area2(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]);
}

TriMesh make_structured_mesh(const Rect& r, int n, double jitter, std::uint64_t seed) {
  if (n < 1) throw std::runtime_error("mesh: subdivision count must be >= 1");
  if (!(r.width() > 0.0) || !(r.height() > 0.0))
    throw std::runtime_error("mesh: degenerate rectangle");
  if (jitter < 0.0 || jitter >= 0.5)
    throw std::runtime_error("mesh: jitter fraction must lie in [0, 0.5)");

  TriMesh m;
  const double hx = r.width() / n;
  const double hy = r.height() / n;
  m.vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      m.vertices.push_back({r.x0 + i * hx, r.y0 + j * hy});

  if (jitter > 0.0) {
    std::mt19937_64 rng(seed);
    auto uni = [&rng]() { return (rng() >> 11) * 0x1.0p-53 - 0.5; };
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) {
        auto& v = m.vertices[static_cast<std::size_t>(j) * (n + 1) + i];
        v[0] += 2.0 * jitter * hx * uni();
        v[1] += 2.0 * jitter * hy * uni();
      }
  }

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  m.triangles.reserve(static_cast<std::size_t>(2) * n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        m.triangles.push_back({v00, v10, v11});
        m.triangles.push_back({v00, v11, v01});
      } else {
        m.triangles.push_back({v00, v10, v01});
        m.triangles.push_back({v10, v11, v01});
      }
    }

  finalize_topology(m);
  validate_mesh(m);
  return m;
}

TriMesh refine_uniform(const TriMesh& parent) {
  TriMesh m;
  m.vertices = parent.vertices;
  const int nv = parent.n_vertices();
  m.vertices.resize(nv + parent.n_edges());
  for (int e = 0; e < parent.n_edges(); ++e)
    m.vertices[nv + e] = parent.edge_midpoints[e];

  m.triangles.reserve(static_cast<std::size_t>(4) * parent.n_triangles());
  for (int t = 0; t < parent.n_triangles(); ++t) {
    const auto& tri = parent.triangles[t];
    // midpoint opposite local vertex i sits on parent edge triangle_edges[t][i]
    const int m0 = nv + parent.triangle_edges[t][0];
    const int m1 = nv + parent.triangle_edges[t][1];
    const int m2 = nv + parent.triangle_edges[t][2];
    m.triangles.push_back({tri[0], m2, m1});
    m.triangles.push_back({tri[1], m0, m2});
    m.triangles.push_back({tri[2], m1, m0});
    m.triangles.push_back({m0, m1, m2});
  }

  finalize_topology(m);
  validate_mesh(m);
  return m;
}

void validate_mesh(const TriMesh& m) {
  if (m.n_vertices() < 3 || m.n_triangles() < 1)
    throw std::runtime_error("mesh: too few entities");
  for (int t = 0; t < m.n_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const int v = m.triangles[t][i];
      if (v < 0 || v >= m.n_vertices())
        throw std::runtime_error("mesh: triangle vertex index out of range");
    }
    if (signed_area2(m.vertices[m.triangles[t][0]], m.vertices[m.triangles[t][1]],
                     m.vertices[m.triangles[t][2]]) <= 0.0)
      throw std::runtime_error("mesh: triangle not counterclockwise or degenerate");
  }
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edges[e][0] >= m.edges[e][1])
      throw std::runtime_error("mesh: edge vertex pair not sorted");
    if (e > 0 && !(m.edges[static_cast<std::size_t>(e) - 1] < m.edges[e]))
      throw std::runtime_error("mesh: edges not in lexicographic order");
    const int expected = m.edge_is_boundary[e] ? 1 : 2;
    int found = 0;
    for (int k = 0; k < 2; ++k)
      if (m.edge_to_triangles[e][k] >= 0) ++found;
    if (found != expected)
      throw std::runtime_error("mesh: edge/triangle adjacency inconsistent");
  }
  // Euler characteristic of a triangulated topological disk
  if (m.n_vertices() - m.n_edges() + m.n_triangles() != 1)
    throw std::runtime_error("mesh: Euler characteristic is not 1");
}

double quasi_uniformity(const TriMesh& m) {
  double hmin = 1e300, hmax = 0.0;
  for (int t = 0; t < m.n_triangles(); ++t) {
    double ht = 0.0;
    for (int i = 0; i < 3; ++i)
      ht = std::max(ht, edge_length(m, m.triangles[t][(i + 1) % 3],
                                    m.triangles[t][(i + 2) % 3]));
    hmin = std::min(hmin, ht);
    hmax = std::max(hmax, ht);
  }
  return hmax / hmin;
}

std::vector<int> interior_edge_indices(const TriMesh& m) {
  std::vector<int> out;
  out.reserve(m.n_edges());
  for (int e = 0; e < m.n_edges(); ++e)
    if (!m.edge_is_boundary[e]) out.push_back(e);
  return out;
}

void write_mesh(std::ostream& os, const TriMesh& m) {
  os << m.n_triangles() << ' ' << m.n_vertices() << ' ' << m.n_edges() << '\n';
  char buf[64];
  for (const auto& v : m.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v[0], v[1]);
    os << buf;
  }
  for (const auto& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (int e = 0; e < m.n_edges(); ++e)
    os << m.edges[e][0] << ' ' << m.edges[e][1] << ' '
       << int(m.edge_is_boundary[e]) << '\n';
}

TriMesh read_mesh(std::istream& is) {
  int ntri = 0, nvert = 0, nedge = 0;
  if (!(is >> ntri >> nvert >> nedge))
    throw std::runtime_error("mesh import: bad header");
  if (ntri < 1 || nvert < 3 || nedge < 3)
    throw std::runtime_error("mesh import: non-positive entity counts");
  TriMesh m;
  m.vertices.resize(nvert);
  for (auto& v : m.vertices)
    if (!(is >> v[0] >> v[1])) throw std::runtime_error("mesh import: bad vertex line");
  m.triangles.resize(ntri);
  for (auto& t : m.triangles)
    if (!(is >> t[0] >> t[1] >> t[2]))
      throw std::runtime_error("mesh import: bad triangle line");
  finalize_topology(m);
  if (m.n_edges() != nedge)
    throw std::runtime_error("mesh import: edge count does not match topology");
  for (int e = 0; e < nedge; ++e) {
    int a = 0, b = 0, flag = 0;
    if (!(is >> a >> b >> flag)) throw std::runtime_error("mesh import: bad edge line");
    if (m.edges[e] != std::array<int, 2>{a, b} || int(m.edge_is_boundary[e]) != flag)
      throw std::runtime_error("mesh import: edge section inconsistent with triangles");
  }
  validate_mesh(m);
  return m;
}

}  // namespace elastuq

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace elastuq {

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

// Conforming triangulation of an axis-aligned rectangle.
//
// Invariants (checked by validate_mesh):
//  - triangles are counterclockwise with strictly positive area
//  - edges are stored as sorted vertex pairs in lexicographic order
//  - every interior edge is shared by exactly two triangles, every boundary
//    edge by one
//  - triangle_edges[t][i] is the edge opposite local vertex i of triangle t
struct TriMesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<double, 2>> edge_midpoints;
  std::vector<std::uint8_t> edge_is_boundary;
  std::vector<std::array<int, 2>> edge_to_triangles;  // second entry -1 on boundary
  std::vector<std::array<int, 3>> triangle_edges;
  double h = 0.0;  // max edge length over all triangles

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_interior_edges() const;
  int n_boundary_edges() const;
};

// n x n cells, each split along alternating diagonals. jitter moves interior
// vertices by a uniform perturbation of at most jitter * (cell size) per
// coordinate, seeded and deterministic; jitter must stay below 0.5 and the
// result is validated. Boundary vertices are never moved, so the rectangle is
// covered exactly.
TriMesh make_structured_mesh(const Rect& r, int n, double jitter = 0.0,
                             std::uint64_t seed = 0);

// Red refinement: four congruent children per triangle. Child vertices are
// the parent edge midpoints, so h halves exactly on structured meshes.
TriMesh refine_uniform(const TriMesh& m);

// Throws std::runtime_error naming the first violated invariant.
void validate_mesh(const TriMesh& m);

// max_K h_K / min_K h_K
double quasi_uniformity(const TriMesh& m);

double triangle_area(const TriMesh& m, int t);

std::vector<int> interior_edge_indices(const TriMesh& m);

// Plain-text round trip. Header line "ntri nvert nedge", then vertex
// coordinates, triangle vertex triples, edge pairs with a boundary flag.
void write_mesh(std::ostream& os, const TriMesh& m);
TriMesh read_mesh(std::istream& is);

}  // namespace elastuq

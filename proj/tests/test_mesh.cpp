#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "elastuq/mesh.hpp"

using namespace elastuq;

TEST_CASE("unit square n=1 has the expected entity counts") {
  const TriMesh m = make_structured_mesh({0, 0, 1, 1}, 1);
  CHECK(m.n_vertices() == 4);
  CHECK(m.n_triangles() == 2);
  CHECK(m.n_edges() == 5);
  CHECK(m.n_interior_edges() == 1);
  CHECK(m.h == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("n=2 satisfies the Euler relation and interior edge count") {
  const TriMesh m = make_structured_mesh({0, 0, 1, 1}, 2);
  CHECK(m.n_vertices() == 9);
  CHECK(m.n_triangles() == 8);
  CHECK(m.n_edges() == 16);
  CHECK(m.n_vertices() - m.n_edges() + m.n_triangles() == 1);
  CHECK(m.n_interior_edges() == 3 * 2 * 2 - 2 * 2);
}

TEST_CASE("interior edge count formula 3n^2-2n holds across n") {
  for (int n : {1, 3, 4, 7, 17}) {
    const TriMesh m = make_structured_mesh({0, 0, 2, 1}, n);
    CHECK(m.n_interior_edges() == 3 * n * n - 2 * n);
    CHECK(m.n_triangles() == 2 * n * n);
  }
}

TEST_CASE("every interior edge has two adjacent triangles, boundary one") {
  const TriMesh m = make_structured_mesh({0, 0, 1, 1}, 4);
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edge_is_boundary[e]) {
      CHECK(m.edge_to_triangles[e][1] == -1);
    } else {
      CHECK(m.edge_to_triangles[e][0] >= 0);
      CHECK(m.edge_to_triangles[e][1] >= 0);
    }
  }
}

TEST_CASE("triangles are counterclockwise and edge numbering is lexicographic") {
  const TriMesh m = make_structured_mesh({0, 0, 1, 1}, 3);
  for (int t = 0; t < m.n_triangles(); ++t) CHECK(triangle_area(m, t) > 0.0);
  for (int e = 1; e < m.n_edges(); ++e) CHECK(m.edges[e - 1] < m.edges[e]);
}

TEST_CASE("triangle_edges maps local edge i opposite vertex i") {
  const TriMesh m = make_structured_mesh({0, 0, 1, 1}, 2);
  for (int t = 0; t < m.n_triangles(); ++t)
    for (int i = 0; i < 3; ++i) {
      const auto& e = m.edges[m.triangle_edges[t][i]];
      // the opposite edge must not contain vertex i
      CHECK(e[0] != m.triangles[t][i]);
      CHECK(e[1] != m.triangles[t][i]);
    }
}

TEST_CASE("h matches the cell diagonal and n=17 on (0,pi)^2 gives 0.2614") {
  const double pi = std::acos(-1.0);
  const TriMesh m = make_structured_mesh({0, 0, pi, pi}, 17);
  CHECK(m.h == doctest::Approx(std::sqrt(2.0) * pi / 17.0).epsilon(1e-14));
  CHECK(m.h == doctest::Approx(0.2614).epsilon(1e-3));
}

TEST_CASE("refinement halves h exactly and quadruples triangle count") {
  TriMesh m = make_structured_mesh({0, 0, 1, 2}, 2);
  double prev_h = m.h;
  int prev_t = m.n_triangles();
  for (int level = 0; level < 3; ++level) {
    m = refine_uniform(m);
    CHECK(m.n_triangles() == 4 * prev_t);
    CHECK(prev_h / m.h == doctest::Approx(2.0).epsilon(1e-12));
    prev_h = m.h;
    prev_t = m.n_triangles();
  }
}

TEST_CASE("refinement preserves total area") {
  TriMesh m = make_structured_mesh({0, 0, 1, 1}, 3, 0.2, 77);
  auto total = [](const TriMesh& msh) {
    double a = 0.0;
    for (int t = 0; t < msh.n_triangles(); ++t) a += triangle_area(msh, t);
    return a;
  };
  const double a0 = total(m);
  CHECK(a0 == doctest::Approx(1.0).epsilon(1e-13));
  m = refine_uniform(m);
  CHECK(total(m) == doctest::Approx(a0).epsilon(1e-13));
}

TEST_CASE("jitter is deterministic for a fixed seed and keeps validity") {
  const TriMesh a = make_structured_mesh({0, 0, 1, 1}, 5, 0.25, 42);
  const TriMesh b = make_structured_mesh({0, 0, 1, 1}, 5, 0.25, 42);
  const TriMesh c = make_structured_mesh({0, 0, 1, 1}, 5, 0.25, 43);
  CHECK(a.vertices == b.vertices);
  CHECK(a.vertices != c.vertices);
  validate_mesh(a);
  CHECK(quasi_uniformity(a) > 1.0);
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS(make_structured_mesh({0, 0, 0, 1}, 2));
  CHECK_THROWS(make_structured_mesh({0, 0, 1, 1}, 0));
  CHECK_THROWS(make_structured_mesh({0, 0, 1, 1}, 2, 0.6));
}

TEST_CASE("export/import round trip preserves the mesh") {
  const TriMesh m = make_structured_mesh({0, 0, 1, 1}, 3, 0.1, 9);
  std::stringstream ss;
  write_mesh(ss, m);
  const TriMesh r = read_mesh(ss);
  CHECK(r.vertices == m.vertices);
  CHECK(r.triangles == m.triangles);
  CHECK(r.edges == m.edges);
  CHECK(r.h == doctest::Approx(m.h).epsilon(1e-15));
}

TEST_CASE("import rejects inconsistent edge sections") {
  const TriMesh m = make_structured_mesh({0, 0, 1, 1}, 2);
  std::stringstream ss;
  write_mesh(ss, m);
  std::string text = ss.str();
  // corrupt the final boundary flag
  text.replace(text.rfind(" 1\n"), 3, " 0\n");
  std::stringstream bad(text);
  CHECK_THROWS(read_mesh(bad));
}

TEST_CASE("interior edge midpoints are strictly inside the domain") {
  const TriMesh m = make_structured_mesh({0, 0, 1, 1}, 4);
  for (int e : interior_edge_indices(m)) {
    CHECK(m.edge_midpoints[e][0] > 0.0);
    CHECK(m.edge_midpoints[e][0] < 1.0);
    CHECK(m.edge_midpoints[e][1] > 0.0);
    CHECK(m.edge_midpoints[e][1] < 1.0);
  }
}

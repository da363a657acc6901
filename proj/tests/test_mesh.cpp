#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "flowfem/mesh.hpp"

using namespace flowfem;

TEST_CASE("entity counts") {
  {
    const TriMesh m = build_pixel_mesh(2, 2);
    CHECK(m.n_vertices == 4);
    CHECK(m.n_triangles == 2);
    CHECK(m.edges.size() == 5);
  }
  {
    const TriMesh m = build_pixel_mesh(10, 10);
    CHECK(m.n_vertices == 100);
    CHECK(m.n_triangles == 162);
    CHECK(m.edges.size() == 261);
  }
  {
    // W*H vertices, 2(W-1)(H-1) triangles, (W-1)H + W(H-1) + (W-1)(H-1) edges
    const TriMesh m = build_pixel_mesh(7, 5);
    CHECK(m.n_vertices == 35);
    CHECK(m.n_triangles == 48);
    CHECK(m.edges.size() == 6 * 5 + 7 * 4 + 6 * 4);
  }
}

TEST_CASE("triangles are CCW with area 1/2 and diameter sqrt(2)") {
  const TriMesh m = build_pixel_mesh(6, 4);
  double total = 0.0;
  for (int t = 0; t < m.n_triangles; ++t) {
    const int* v = &m.tri[3 * t];
    const double ax = m.vx(v[1]) - m.vx(v[0]), ay = m.vy(v[1]) - m.vy(v[0]);
    const double bx = m.vx(v[2]) - m.vx(v[0]), by = m.vy(v[2]) - m.vy(v[0]);
    const double cross = ax * by - ay * bx;
    CHECK(cross == doctest::Approx(1.0));  // CCW, twice the area
    CHECK(m.area[t] == 0.5);
    CHECK(m.hK[t] == doctest::Approx(std::sqrt(2.0)));
    total += m.area[t];
  }
  CHECK(total == doctest::Approx(5.0 * 3.0));  // (W-1)(H-1)
}

TEST_CASE("edges: adjacency, normals, boundary count") {
  const int W = 6, H = 5;
  const TriMesh m = build_pixel_mesh(W, H);
  int boundary = 0;
  for (const auto& e : m.edges) {
    CHECK(e.v0 < e.v1);
    CHECK(std::hypot(e.nx, e.ny) == doctest::Approx(1.0));
    // normal orthogonal to the edge direction
    const double ex = m.vx(e.v1) - m.vx(e.v0), ey = m.vy(e.v1) - m.vy(e.v0);
    CHECK(std::abs(e.nx * ex + e.ny * ey) < 1e-14);
    CHECK(e.length == doctest::Approx(std::hypot(ex, ey)));

    auto centroid = [&](int t, double& cx, double& cy) {
      const int* v = &m.tri[3 * t];
      cx = (m.vx(v[0]) + m.vx(v[1]) + m.vx(v[2])) / 3.0;
      cy = (m.vy(v[0]) + m.vy(v[1]) + m.vy(v[2])) / 3.0;
    };
    double c0x, c0y;
    centroid(e.t0, c0x, c0y);
    if (e.t1 >= 0) {
      CHECK(e.t0 < e.t1);
      double c1x, c1y;
      centroid(e.t1, c1x, c1y);
      CHECK((c1x - c0x) * e.nx + (c1y - c0y) * e.ny > 0.0);  // t0 -> t1
    } else {
      ++boundary;
      const double mx = 0.5 * (m.vx(e.v0) + m.vx(e.v1));
      const double my = 0.5 * (m.vy(e.v0) + m.vy(e.v1));
      CHECK((mx - c0x) * e.nx + (my - c0y) * e.ny > 0.0);  // outward
    }
    // adjacent triangles actually contain the edge
    for (int t : {e.t0, e.t1}) {
      if (t < 0) continue;
      const int* v = &m.tri[3 * t];
      CHECK(((v[0] == e.v0 || v[1] == e.v0 || v[2] == e.v0)));
      CHECK(((v[0] == e.v1 || v[1] == e.v1 || v[2] == e.v1)));
    }
  }
  CHECK(boundary == 2 * (W - 1) + 2 * (H - 1));
}

TEST_CASE("tri_edges lists the three edges of each triangle") {
  const TriMesh m = build_pixel_mesh(5, 6);
  for (int t = 0; t < m.n_triangles; ++t) {
    std::set<std::pair<int, int>> want;
    const int* v = &m.tri[3 * t];
    for (int k = 0; k < 3; ++k) {
      int a = v[k], b = v[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      want.insert({a, b});
    }
    std::set<std::pair<int, int>> got;
    for (int k = 0; k < 3; ++k) {
      const auto& e = m.edges[m.tri_edges[3 * t + k]];
      got.insert({e.v0, e.v1});
      CHECK((e.t0 == t || e.t1 == t));
    }
    CHECK(want == got);
  }
}

TEST_CASE("lumped weights: incident areas / 3, interior weight 1") {
  const int W = 8, H = 7;
  const TriMesh m = build_pixel_mesh(W, H);
  double total = 0.0;
  for (int v = 0; v < m.n_vertices; ++v) total += m.lumped[v];
  CHECK(total == doctest::Approx((W - 1.0) * (H - 1.0)));
  for (int y = 1; y < H - 1; ++y)
    for (int x = 1; x < W - 1; ++x)
      CHECK(m.lumped[m.vertex(x, y)] == doctest::Approx(1.0));  // 6 triangles / 3 * 1/2
}

TEST_CASE("incidence maps are sorted and consistent") {
  const TriMesh m = build_pixel_mesh(6, 6);
  for (int v = 0; v < m.n_vertices; ++v) {
    for (int p = m.v2t_ptr[v]; p < m.v2t_ptr[v + 1]; ++p) {
      if (p > m.v2t_ptr[v]) CHECK(m.v2t[p] > m.v2t[p - 1]);
      const int* tv = &m.tri[3 * m.v2t[p]];
      CHECK((tv[0] == v || tv[1] == v || tv[2] == v));
    }
    for (int p = m.v2v_ptr[v]; p < m.v2v_ptr[v + 1]; ++p) {
      if (p > m.v2v_ptr[v]) CHECK(m.v2v[p] > m.v2v[p - 1]);
      CHECK(m.v2v[p] != v);
    }
  }
  // v2v matches the edge list
  std::set<std::pair<int, int>> from_edges, from_adj;
  for (const auto& e : m.edges) from_edges.insert({e.v0, e.v1});
  for (int v = 0; v < m.n_vertices; ++v)
    for (int p = m.v2v_ptr[v]; p < m.v2v_ptr[v + 1]; ++p) {
      const int w = m.v2v[p];
      from_adj.insert({std::min(v, w), std::max(v, w)});
    }
  CHECK(from_edges == from_adj);
}

TEST_CASE("P1 hat gradients") {
  const TriMesh m = build_pixel_mesh(9, 9);
  for (int t = 0; t < m.n_triangles; ++t) {
    double gx[3], gy[3];
    p1_gradients(m, t, gx, gy);
    // partition of unity: gradients sum to zero
    CHECK(std::abs(gx[0] + gx[1] + gx[2]) < 1e-14);
    CHECK(std::abs(gy[0] + gy[1] + gy[2]) < 1e-14);
    // exact gradient of an interpolated affine function
    const double a = 0.3, b = -1.7, c = 2.4;
    const int* v = &m.tri[3 * t];
    double dx = 0.0, dy = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double f = a + b * m.vx(v[k]) + c * m.vy(v[k]);
      dx += gx[k] * f;
      dy += gy[k] * f;
    }
    CHECK(dx == doctest::Approx(b).epsilon(1e-12));
    CHECK(dy == doctest::Approx(c).epsilon(1e-12));
    // hat k is 1 at vertex k, 0 at the others: check via linearity
    for (int k = 0; k < 3; ++k) {
      double sum = 0.0;  // value of hat k at vertex (k+1): 0 - grad consistency
      const int kn = (k + 1) % 3;
      sum = 1.0 + gx[k] * (m.vx(v[kn]) - m.vx(v[k])) + gy[k] * (m.vy(v[kn]) - m.vy(v[k]));
      CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate grids are rejected") {
  CHECK_THROWS(build_pixel_mesh(1, 5));
  CHECK_THROWS(build_pixel_mesh(5, 1));
}

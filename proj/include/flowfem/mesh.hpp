#pragma once

#include <vector>

namespace flowfem {

/// Structured P1 triangulation of a W x H pixel grid: vertices at pixel
/// centers, each grid cell split along the bottom-left -> top-right diagonal.
struct TriMesh {
  int width = 0;   // vertex grid columns
  int height = 0;  // vertex grid rows
  int n_vertices = 0;
  int n_triangles = 0;

  std::vector<int> tri;         // 3 vertex ids per triangle, CCW
  std::vector<double> area;     // per triangle
  std::vector<double> hK;       // per triangle: longest edge length

  struct Edge {
    int v0, v1;     // endpoint vertex ids, v0 < v1
    int t0, t1;     // adjacent triangles, t1 = -1 on the boundary
    double length;
    double nx, ny;  // unit normal, oriented t0 -> t1 (outward on boundary)
  };
  std::vector<Edge> edges;
  std::vector<int> tri_edges;   // 3 edge ids per triangle

  std::vector<double> lumped;   // per vertex: sum of incident areas / 3

  // vertex -> incident triangles, CSR, triangle ids ascending
  std::vector<int> v2t_ptr, v2t;
  // vertex -> adjacent vertices (shared edge), CSR, ids ascending
  std::vector<int> v2v_ptr, v2v;

  int vertex(int x, int y) const { return y * width + x; }
  double vx(int v) const { return v % width; }
  double vy(int v) const { return v / width; }
};

TriMesh build_pixel_mesh(int width, int height);

/// Constant gradients of the three P1 hat functions on triangle t.
void p1_gradients(const TriMesh& m, int t, double gx[3], double gy[3]);

}  // namespace flowfem

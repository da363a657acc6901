#include "flowfem/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace flowfem {

TriMesh build_pixel_mesh(int width, int height) {
  if (width < 2 || height < 2)
    throw std::runtime_error("mesh.build_pixel_mesh: grid must be at least 2x2");

  TriMesh m;
  m.width = width;
  m.height = height;
  m.n_vertices = width * height;
  const int cw = width - 1, ch = height - 1;
  m.n_triangles = 2 * cw * ch;

  m.tri.resize(static_cast<size_t>(m.n_triangles) * 3);
  m.area.assign(m.n_triangles, 0.5);
  m.hK.assign(m.n_triangles, std::sqrt(2.0));

  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      const int v00 = y * width + x;
      const int v10 = v00 + 1;
      const int v01 = v00 + width;
      const int v11 = v01 + 1;
      const int t = 2 * (y * cw + x);
      // lower: bottom edge + diagonal, upper: left edge + diagonal; both CCW
      int* lo = &m.tri[static_cast<size_t>(t) * 3];
      lo[0] = v00; lo[1] = v10; lo[2] = v11;
      int* up = &m.tri[static_cast<size_t>(t + 1) * 3];
      up[0] = v00; up[1] = v11; up[2] = v01;
    }
  }

  // Edges in three deterministic blocks: horizontal, vertical, diagonal.
  const int nh = cw * height, nv = width * ch, nd = cw * ch;
  m.edges.resize(static_cast<size_t>(nh) + nv + nd);
  auto lower_tri = [cw](int cx, int cy) { return 2 * (cy * cw + cx); };

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < cw; ++x) {
      TriMesh::Edge e;
      e.v0 = y * width + x;
      e.v1 = e.v0 + 1;
      e.length = 1.0;
      // below: top edge of cell (x, y-1) -> its upper triangle;
      // above: bottom edge of cell (x, y) -> its lower triangle
      const int below = (y > 0) ? lower_tri(x, y - 1) + 1 : -1;
      const int above = (y < ch) ? lower_tri(x, y) : -1;
      if (below >= 0 && above >= 0) {
        e.t0 = below < above ? below : above;
        e.t1 = below < above ? above : below;
        e.nx = 0.0;
        e.ny = (e.t0 == below) ? 1.0 : -1.0;  // from t0 side toward t1
      } else {
        e.t0 = below >= 0 ? below : above;
        e.t1 = -1;
        e.nx = 0.0;
        e.ny = (below >= 0) ? 1.0 : -1.0;  // outward
      }
      m.edges[y * cw + x] = e;
    }
  }
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < width; ++x) {
      TriMesh::Edge e;
      e.v0 = y * width + x;
      e.v1 = e.v0 + width;
      e.length = 1.0;
      // left of the edge: cell (x-1, y), its lower triangle holds the right
      // cell edge; right: cell (x, y), upper triangle holds the left edge
      const int left = (x > 0) ? lower_tri(x - 1, y) : -1;
      const int right = (x < cw) ? lower_tri(x, y) + 1 : -1;
      if (left >= 0 && right >= 0) {
        e.t0 = left < right ? left : right;
        e.t1 = left < right ? right : left;
        e.nx = (e.t0 == left) ? 1.0 : -1.0;
        e.ny = 0.0;
      } else {
        e.t0 = left >= 0 ? left : right;
        e.t1 = -1;
        e.nx = (left >= 0) ? 1.0 : -1.0;
        e.ny = 0.0;
      }
      m.edges[nh + y * width + x] = e;
    }
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      TriMesh::Edge e;
      e.v0 = y * width + x;
      e.v1 = e.v0 + width + 1;
      e.length = std::sqrt(2.0);
      e.t0 = lower_tri(x, y);      // lower is below-right of the diagonal
      e.t1 = e.t0 + 1;
      e.nx = -inv_sqrt2;           // from lower toward upper
      e.ny = inv_sqrt2;
      m.edges[nh + nv + y * cw + x] = e;
    }
  }

  m.tri_edges.resize(static_cast<size_t>(m.n_triangles) * 3);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      const int t = lower_tri(x, y);
      const int eh_bot = y * cw + x;
      const int eh_top = (y + 1) * cw + x;
      const int ev_left = nh + y * width + x;
      const int ev_right = nh + y * width + x + 1;
      const int ed = nh + nv + y * cw + x;
      int* lo = &m.tri_edges[static_cast<size_t>(t) * 3];
      lo[0] = eh_bot; lo[1] = ev_right; lo[2] = ed;
      int* up = &m.tri_edges[static_cast<size_t>(t + 1) * 3];
      up[0] = ed; up[1] = eh_top; up[2] = ev_left;
    }
  }

  // lumped vertex weights
  m.lumped.assign(m.n_vertices, 0.0);
  for (int t = 0; t < m.n_triangles; ++t)
    for (int k = 0; k < 3; ++k)
      m.lumped[m.tri[static_cast<size_t>(t) * 3 + k]] += m.area[t] / 3.0;

  // vertex -> incident triangles (triangles visited ascending => CSR sorted)
  m.v2t_ptr.assign(m.n_vertices + 1, 0);
  for (int t = 0; t < m.n_triangles; ++t)
    for (int k = 0; k < 3; ++k)
      ++m.v2t_ptr[m.tri[static_cast<size_t>(t) * 3 + k] + 1];
  for (int v = 0; v < m.n_vertices; ++v) m.v2t_ptr[v + 1] += m.v2t_ptr[v];
  m.v2t.resize(m.v2t_ptr.back());
  {
    std::vector<int> fill(m.n_vertices, 0);
    for (int t = 0; t < m.n_triangles; ++t)
      for (int k = 0; k < 3; ++k) {
        const int v = m.tri[static_cast<size_t>(t) * 3 + k];
        m.v2t[m.v2t_ptr[v] + fill[v]++] = t;
      }
  }

  // vertex adjacency from the edge list
  m.v2v_ptr.assign(m.n_vertices + 1, 0);
  for (const auto& e : m.edges) {
    ++m.v2v_ptr[e.v0 + 1];
    ++m.v2v_ptr[e.v1 + 1];
  }
  for (int v = 0; v < m.n_vertices; ++v) m.v2v_ptr[v + 1] += m.v2v_ptr[v];
  m.v2v.resize(m.v2v_ptr.back());
  {
    std::vector<int> fill(m.n_vertices, 0);
    // grid neighbors of v, ascending id: v-W-1? no such edge; the stencil is
    // {v-W, v-W-1?}: actual neighbors are x+-1, y+-1 and the (+1,+1)/(-1,-1)
    // diagonal. Insert in ascending order per vertex by scanning candidates.
    auto push = [&](int v, int w) { m.v2v[m.v2v_ptr[v] + fill[v]++] = w; };
    for (int v = 0; v < m.n_vertices; ++v) {
      const int x = v % width, y = v / width;
      if (y > 0 && x > 0) push(v, v - width - 1);
      if (y > 0) push(v, v - width);
      if (x > 0) push(v, v - 1);
      if (x < cw) push(v, v + 1);
      if (y < ch) push(v, v + width);
      if (y < ch && x < cw) push(v, v + width + 1);
    }
  }

  return m;
}

void p1_gradients(const TriMesh& m, int t, double gx[3], double gy[3]) {
  const int* v = &m.tri[static_cast<size_t>(t) * 3];
  double px[3], py[3];
  for (int k = 0; k < 3; ++k) {
    px[k] = m.vx(v[k]);
    py[k] = m.vy(v[k]);
  }
  const double twoA = 2.0 * m.area[t];
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3, b = (k + 2) % 3;
    // grad of hat k = rot90(p_b - p_a) / (2 area), rot90(v) = (-v.y, v.x)
    gx[k] = -(py[b] - py[a]) / twoA;
    gy[k] = (px[b] - px[a]) / twoA;
  }
}

}  // namespace flowfem

#include "flowfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowfem {

RegField uniform_reg(const TriMesh& m, double alpha0, double lambda0) {
  RegField r;
  r.alpha.assign(m.n_triangles, alpha0);
  r.lambda.assign(m.n_triangles, lambda0);
  return r;
}

namespace {

// nodal reaction matrix (row-major upper addressing via full storage) and load
inline void nodal_terms(const DataTerms& dt, int v, int nc, double A[9], double F[3]) {
  A[0] = dt.a11[v]; A[1] = dt.a12[v];
  A[3] = dt.a12[v]; A[4] = dt.a22[v];
  F[0] = dt.f1[v];  F[1] = dt.f2[v];
  if (nc == 3) {
    A[2] = dt.a13[v]; A[5] = dt.a23[v];
    A[6] = dt.a13[v]; A[7] = dt.a23[v]; A[8] = dt.a33[v];
    F[2] = dt.f3[v];
  }
}

}  // namespace

SparseSystem assemble(const TriMesh& m, const DataTerms& dt, const RegField& reg,
                      int components, const DirichletSet* dirichlet) {
  if (components != 2 && components != 3)
    throw std::runtime_error("assembly.assemble: components must be 2 or 3");
  if (dt.width != m.width || dt.height != m.height)
    throw std::runtime_error("assembly.assemble: data terms do not match the mesh");
  if (static_cast<int>(reg.alpha.size()) != m.n_triangles ||
      static_cast<int>(reg.lambda.size()) != m.n_triangles)
    throw std::runtime_error("assembly.assemble: regularization field size mismatch");

  const int nv = m.n_vertices, nc = components;

  SparseSystem sys;
  sys.components = nc;
  sys.vert_to_free.assign(nv, 0);
  if (dirichlet) sys.constraints = *dirichlet;
  std::vector<double> g;  // constrained values, nc per vertex
  if (dirichlet && !dirichlet->empty()) {
    if (dirichlet->values.size() != dirichlet->vertices.size() * static_cast<size_t>(nc))
      throw std::runtime_error("assembly.assemble: Dirichlet values size mismatch");
    g.assign(static_cast<size_t>(nv) * nc, 0.0);
    for (size_t k = 0; k < dirichlet->vertices.size(); ++k) {
      const int v = dirichlet->vertices[k];
      if (v < 0 || v >= nv)
        throw std::runtime_error("assembly.assemble: Dirichlet vertex out of range");
      sys.vert_to_free[v] = -1;
      for (int c = 0; c < nc; ++c) g[static_cast<size_t>(v) * nc + c] = dirichlet->values[k * nc + c];
    }
  }

  int n_free = 0;
  sys.free_to_vert.clear();
  for (int v = 0; v < nv; ++v) {
    if (sys.vert_to_free[v] == 0) {
      sys.vert_to_free[v] = n_free++;
      sys.free_to_vert.push_back(v);
    } else {
      sys.vert_to_free[v] = -1;
    }
  }
  sys.n = n_free * nc;

  // pattern: per free vertex, scalar row length = free neighbors + own block
  std::vector<int> nfree_adj(n_free, 0);
#pragma omp parallel for
  for (int f = 0; f < n_free; ++f) {
    const int v = sys.free_to_vert[f];
    int cnt = 0;
    for (int p = m.v2v_ptr[v]; p < m.v2v_ptr[v + 1]; ++p)
      if (sys.vert_to_free[m.v2v[p]] >= 0) ++cnt;
    nfree_adj[f] = cnt;
  }
  sys.row_ptr.assign(sys.n + 1, 0);
  for (int f = 0; f < n_free; ++f) {
    const int len = nfree_adj[f] + nc;
    for (int c = 0; c < nc; ++c) sys.row_ptr[f * nc + c + 1] = len;
  }
  for (int r = 0; r < sys.n; ++r) sys.row_ptr[r + 1] += sys.row_ptr[r];
  sys.cols.assign(sys.row_ptr.back(), 0);
  sys.vals.assign(sys.row_ptr.back(), 0.0);
  sys.rhs.assign(sys.n, 0.0);

#pragma omp parallel
  {
    std::vector<int> adj;       // adjacent vertices incl. self, ascending
    std::vector<double> sa, sl; // stiffness dot sums, alpha- and lambda-weighted
#pragma omp for schedule(static)
    for (int f = 0; f < n_free; ++f) {
      const int v = sys.free_to_vert[f];
      adj.clear();
      bool self_in = false;
      for (int p = m.v2v_ptr[v]; p < m.v2v_ptr[v + 1]; ++p) {
        const int w = m.v2v[p];
        if (!self_in && w > v) { adj.push_back(v); self_in = true; }
        adj.push_back(w);
      }
      if (!self_in) adj.push_back(v);
      const int na = static_cast<int>(adj.size());
      sa.assign(na, 0.0);
      sl.assign(na, 0.0);

      // gather stiffness row over incident triangles, ascending ids
      for (int p = m.v2t_ptr[v]; p < m.v2t_ptr[v + 1]; ++p) {
        const int t = m.v2t[p];
        double gx[3], gy[3];
        p1_gradients(m, t, gx, gy);
        const int* tv = &m.tri[static_cast<size_t>(t) * 3];
        int kv = 0;
        while (tv[kv] != v) ++kv;
        for (int kw = 0; kw < 3; ++kw) {
          const int w = tv[kw];
          const int pos = static_cast<int>(
              std::lower_bound(adj.begin(), adj.end(), w) - adj.begin());
          const double dot = m.area[t] * (gx[kv] * gx[kw] + gy[kv] * gy[kw]);
          sa[pos] += reg.alpha[t] * dot;
          if (nc == 3) sl[pos] += reg.lambda[t] * dot;
        }
      }

      double Av[9] = {0}, Fv[3] = {0};
      nodal_terms(dt, v, nc, Av, Fv);
      const double wv = m.lumped[v];

      // scatter into CSR rows and right-hand side
      const int base = f * nc;
      for (int c = 0; c < nc; ++c) {
        const int row = base + c;
        int q = sys.row_ptr[row];
        double rhs_c = wv * Fv[c];
        for (int a = 0; a < na; ++a) {
          const int w = adj[a];
          const int fw = sys.vert_to_free[w];
          const double stiff = (c < 2) ? sa[a] : sl[a];
          if (w == v) {
            for (int c2 = 0; c2 < nc; ++c2) {
              double val = wv * Av[c * 3 + c2];
              if (c2 == c) val += stiff;
              sys.cols[q] = base + c2;
              sys.vals[q] = val;
              ++q;
            }
          } else if (fw >= 0) {
            sys.cols[q] = fw * nc + c;
            sys.vals[q] = stiff;
            ++q;
          } else {
            rhs_c -= stiff * g[static_cast<size_t>(w) * nc + c];
          }
        }
        sys.rhs[row] = rhs_c;
      }
    }
  }
  return sys;
}

FlowState expand_solution(const TriMesh& m, const SparseSystem& sys,
                          const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != sys.n)
    throw std::runtime_error("assembly.expand_solution: size mismatch");
  const int nc = sys.components;
  FlowState s(m.width, m.height);
  for (size_t f = 0; f < sys.free_to_vert.size(); ++f) {
    const int v = sys.free_to_vert[f];
    s.u1[v] = x[f * nc + 0];
    s.u2[v] = x[f * nc + 1];
    if (nc == 3) s.mt[v] = x[f * nc + 2];
  }
  for (size_t k = 0; k < sys.constraints.vertices.size(); ++k) {
    const int v = sys.constraints.vertices[k];
    s.u1[v] = sys.constraints.values[k * nc + 0];
    s.u2[v] = sys.constraints.values[k * nc + 1];
    if (nc == 3) s.mt[v] = sys.constraints.values[k * nc + 2];
  }
  return s;
}

std::vector<double> flatten_state(const SparseSystem& sys, const FlowState& state) {
  const int nc = sys.components;
  std::vector<double> x(sys.n);
  for (size_t f = 0; f < sys.free_to_vert.size(); ++f) {
    const int v = sys.free_to_vert[f];
    x[f * nc + 0] = state.u1[v];
    x[f * nc + 1] = state.u2[v];
    if (nc == 3) x[f * nc + 2] = state.mt[v];
  }
  return x;
}

double energy(const TriMesh& m, const DataTerms& dt, const RegField& reg,
              const FlowState& state, int components) {
  const int nc = components;
  double e_grad = 0.0;
  for (int t = 0; t < m.n_triangles; ++t) {
    double gx[3], gy[3];
    p1_gradients(m, t, gx, gy);
    const int* tv = &m.tri[static_cast<size_t>(t) * 3];
    double du1x = 0, du1y = 0, du2x = 0, du2y = 0, dmx = 0, dmy = 0;
    for (int k = 0; k < 3; ++k) {
      du1x += gx[k] * state.u1[tv[k]];
      du1y += gy[k] * state.u1[tv[k]];
      du2x += gx[k] * state.u2[tv[k]];
      du2y += gy[k] * state.u2[tv[k]];
      if (nc == 3) {
        dmx += gx[k] * state.mt[tv[k]];
        dmy += gy[k] * state.mt[tv[k]];
      }
    }
    double s = reg.alpha[t] * (du1x * du1x + du1y * du1y + du2x * du2x + du2y * du2y);
    if (nc == 3) s += reg.lambda[t] * (dmx * dmx + dmy * dmy);
    e_grad += m.area[t] * s;
  }

  double e_data = 0.0;
  for (int v = 0; v < m.n_vertices; ++v) {
    double A[9] = {0}, F[3] = {0};
    nodal_terms(dt, v, nc, A, F);
    double U[3] = {state.u1[v], state.u2[v], nc == 3 ? state.mt[v] : 0.0};
    double quad = 0.0, lin = 0.0;
    for (int c = 0; c < nc; ++c) {
      for (int c2 = 0; c2 < nc; ++c2) quad += U[c] * A[c * 3 + c2] * U[c2];
      lin += F[c] * U[c];
    }
    e_data += m.lumped[v] * (quad - 2.0 * lin + dt.c[v]);
  }
  return 0.5 * (e_grad + e_data);
}

void spmv(const SparseSystem& sys, const std::vector<double>& x, std::vector<double>& y) {
  y.resize(sys.n);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < sys.n; ++r) {
    double s = 0.0;
    for (int q = sys.row_ptr[r]; q < sys.row_ptr[r + 1]; ++q)
      s += sys.vals[q] * x[sys.cols[q]];
    y[r] = s;
  }
}

}  // namespace flowfem

#include "flowfem/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowfem::ref {

namespace {

int fold(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace

Image gaussian_smooth_direct(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(2 * r + 1);
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    w[k + r] = std::exp(-0.5 * k * k / (sigma * sigma));
    sum += w[k + r];
  }
  for (auto& x : w) x /= sum;

  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double s = 0.0;
      for (int ky = -r; ky <= r; ++ky)
        for (int kx = -r; kx <= r; ++kx)
          s += w[ky + r] * w[kx + r] *
               img.at(fold(x + kx, img.width), fold(y + ky, img.height));
      out.at(x, y) = s;
    }
  return out;
}

DenseSystem assemble_dense(const TriMesh& m, const DataTerms& dt, const RegField& reg,
                           int components, const DirichletSet* dirichlet) {
  const int nc = components, nv = m.n_vertices;
  const int N = nv * nc;
  std::vector<std::vector<double>> A(N, std::vector<double>(N, 0.0));
  std::vector<double> b(N, 0.0);

  // element stiffness, scatter
  for (int t = 0; t < m.n_triangles; ++t) {
    const int* tv = &m.tri[static_cast<size_t>(t) * 3];
    double px[3], py[3];
    for (int k = 0; k < 3; ++k) {
      px[k] = m.vx(tv[k]);
      py[k] = m.vy(tv[k]);
    }
    // hat gradients via the 2x2 barycentric system (Cramer)
    const double j11 = px[1] - px[0], j12 = py[1] - py[0];
    const double j21 = px[2] - px[0], j22 = py[2] - py[0];
    const double det = j11 * j22 - j12 * j21;
    double gx[3], gy[3];
    gx[1] = j22 / det;  gy[1] = -j21 / det;
    gx[2] = -j12 / det; gy[2] = j11 / det;
    gx[0] = -gx[1] - gx[2];
    gy[0] = -gy[1] - gy[2];
    const double area = 0.5 * std::abs(det);
    for (int a = 0; a < 3; ++a)
      for (int bb = 0; bb < 3; ++bb) {
        const double dot = area * (gx[a] * gx[bb] + gy[a] * gy[bb]);
        for (int c = 0; c < nc; ++c) {
          const double coef = c < 2 ? reg.alpha[t] : reg.lambda[t];
          A[tv[a] * nc + c][tv[bb] * nc + c] += coef * dot;
        }
      }
  }

  // lumped reaction and load
  for (int v = 0; v < nv; ++v) {
    double vw = 0.0;
    for (int p = m.v2t_ptr[v]; p < m.v2t_ptr[v + 1]; ++p) vw += m.area[m.v2t[p]] / 3.0;
    const double a13 = nc == 3 ? dt.a13[v] : 0.0;
    const double a23 = nc == 3 ? dt.a23[v] : 0.0;
    const double a33 = nc == 3 ? dt.a33[v] : 0.0;
    double Av[3][3] = {{dt.a11[v], dt.a12[v], a13},
                       {dt.a12[v], dt.a22[v], a23},
                       {a13, a23, a33}};
    double F[3] = {dt.f1[v], dt.f2[v], nc == 3 ? dt.f3[v] : 0.0};
    for (int c = 0; c < nc; ++c) {
      for (int c2 = 0; c2 < nc; ++c2) A[v * nc + c][v * nc + c2] += vw * Av[c][c2];
      b[v * nc + c] += vw * F[c];
    }
  }

  // symmetric elimination of constrained unknowns
  std::vector<char> cons(N, 0);
  std::vector<double> g(N, 0.0);
  if (dirichlet)
    for (size_t k = 0; k < dirichlet->vertices.size(); ++k)
      for (int c = 0; c < nc; ++c) {
        cons[dirichlet->vertices[k] * nc + c] = 1;
        g[dirichlet->vertices[k] * nc + c] = dirichlet->values[k * nc + c];
      }
  std::vector<int> keep;
  for (int i = 0; i < N; ++i)
    if (!cons[i]) keep.push_back(i);

  DenseSystem sys;
  sys.n = static_cast<int>(keep.size());
  sys.A.assign(sys.n, std::vector<double>(sys.n, 0.0));
  sys.b.assign(sys.n, 0.0);
  for (int i = 0; i < sys.n; ++i) {
    double bi = b[keep[i]];
    for (int j = 0; j < N; ++j) {
      if (cons[j])
        bi -= A[keep[i]][j] * g[j];
    }
    for (int j = 0; j < sys.n; ++j) sys.A[i][j] = A[keep[i]][keep[j]];
    sys.b[i] = bi;
  }
  return sys;
}

std::vector<double> solve_dense(DenseSystem sys) {
  const int n = sys.n;
  // LDL^T, no pivoting (SPD input)
  for (int k = 0; k < n; ++k) {
    const double d = sys.A[k][k];
    if (d <= 0.0 || !std::isfinite(d))
      throw std::runtime_error("reference.solve_dense: non-positive pivot");
    for (int i = k + 1; i < n; ++i) {
      const double l = sys.A[i][k] / d;
      for (int j = k; j < n; ++j) sys.A[i][j] -= l * sys.A[k][j];
      sys.A[i][k] = l;
      sys.b[i] -= l * sys.b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = sys.b[i];
    for (int j = i + 1; j < n; ++j) s -= sys.A[i][j] * x[j];
    x[i] = s / sys.A[i][i];
  }
  return x;
}

IndicatorField indicator_quadrature(const TriMesh& m, const DataTerms& dt,
                                    const RegField& reg, const FlowState& state,
                                    int components) {
  const int nc = components;

  // per-triangle solution gradients via the barycentric 2x2 system
  auto tri_grad = [&](int t, const std::vector<double>& field, double& gx, double& gy) {
    const int* tv = &m.tri[static_cast<size_t>(t) * 3];
    const double j11 = m.vx(tv[1]) - m.vx(tv[0]), j12 = m.vy(tv[1]) - m.vy(tv[0]);
    const double j21 = m.vx(tv[2]) - m.vx(tv[0]), j22 = m.vy(tv[2]) - m.vy(tv[0]);
    const double det = j11 * j22 - j12 * j21;
    const double d1 = field[tv[1]] - field[tv[0]];
    const double d2 = field[tv[2]] - field[tv[0]];
    gx = (d1 * j22 - d2 * j12) / det;
    gy = (-d1 * j21 + d2 * j11) / det;
  };

  IndicatorField ind;
  ind.eta.assign(m.n_triangles, 0.0);
  for (int t = 0; t < m.n_triangles; ++t) {
    const int* tv = &m.tri[static_cast<size_t>(t) * 3];

    // nodal residuals of the three equations
    double R[3][3] = {};
    for (int k = 0; k < 3; ++k) {
      const int v = tv[k];
      const double U[3] = {state.u1[v], state.u2[v], nc == 3 ? state.mt[v] : 0.0};
      const double a13 = nc == 3 ? dt.a13[v] : 0.0;
      const double a23 = nc == 3 ? dt.a23[v] : 0.0;
      const double a33 = nc == 3 ? dt.a33[v] : 0.0;
      const double Av[3][3] = {{dt.a11[v], dt.a12[v], a13},
                               {dt.a12[v], dt.a22[v], a23},
                               {a13, a23, a33}};
      const double F[3] = {dt.f1[v], dt.f2[v], nc == 3 ? dt.f3[v] : 0.0};
      for (int c = 0; c < nc; ++c) {
        double au = 0.0;
        for (int c2 = 0; c2 < nc; ++c2) au += Av[c][c2] * U[c2];
        R[c][k] = F[c] - au;
      }
    }

    // edge-midpoint quadrature, exact for quadratics
    double elem = 0.0;
    for (int c = 0; c < nc; ++c) {
      double q = 0.0;
      for (int e = 0; e < 3; ++e) {
        const double mid = 0.5 * (R[c][e] + R[c][(e + 1) % 3]);
        q += mid * mid;
      }
      elem += (m.area[t] / 3.0) * q / (c < 2 ? reg.alpha[t] : reg.lambda[t]);
    }
    double eta = m.hK[t] * std::sqrt(elem);

    for (int le = 0; le < 3; ++le) {
      const auto& ed = m.edges[m.tri_edges[static_cast<size_t>(t) * 3 + le]];
      // normal recomputed from the edge direction
      const double ex = m.vx(ed.v1) - m.vx(ed.v0), ey = m.vy(ed.v1) - m.vy(ed.v0);
      const double len = std::hypot(ex, ey);
      const double nx = ey / len, ny = -ex / len;  // some orientation; squared below
      double jump2 = 0.0;
      for (int c = 0; c < nc; ++c) {
        const std::vector<double>& field = c == 0 ? state.u1 : (c == 1 ? state.u2 : state.mt);
        auto coef = [&](int tt) { return c < 2 ? reg.alpha[tt] : reg.lambda[tt]; };
        double g0x, g0y;
        tri_grad(ed.t0, field, g0x, g0y);
        double flux = coef(ed.t0) * (g0x * nx + g0y * ny);
        double coef_e = coef(ed.t0);
        if (ed.t1 >= 0) {
          double g1x, g1y;
          tri_grad(ed.t1, field, g1x, g1y);
          flux -= coef(ed.t1) * (g1x * nx + g1y * ny);
          coef_e = std::max(coef_e, coef(ed.t1));
        }
        jump2 += flux * flux / coef_e;
      }
      eta += 0.5 * len * std::sqrt(jump2);
    }
    ind.eta[t] = eta;
    ind.eta_max = std::max(ind.eta_max, eta);
  }
  return ind;
}

double aae_direct(const FlowState& flow, const FloField& truth) {
  double s = 0.0;
  long n = 0;
  for (size_t i = 0; i < truth.u.size(); ++i) {
    if (std::abs(truth.u[i]) > kFloValidLimit || std::abs(truth.v[i]) > kFloValidLimit)
      continue;
    const double dot = flow.u1[i] * truth.u[i] + flow.u2[i] * truth.v[i] + 1.0;
    const double n1 = std::sqrt(flow.u1[i] * flow.u1[i] + flow.u2[i] * flow.u2[i] + 1.0);
    const double n2 = std::sqrt(double(truth.u[i]) * truth.u[i] +
                                double(truth.v[i]) * truth.v[i] + 1.0);
    double c = dot / (n1 * n2);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    s += std::acos(c) * 180.0 / M_PI;
    ++n;
  }
  return n ? s / n : 0.0;
}

double ee_direct(const FlowState& flow, const FloField& truth) {
  double s = 0.0;
  long n = 0;
  for (size_t i = 0; i < truth.u.size(); ++i) {
    if (std::abs(truth.u[i]) > kFloValidLimit || std::abs(truth.v[i]) > kFloValidLimit)
      continue;
    s += std::hypot(flow.u1[i] - truth.u[i], flow.u2[i] - truth.v[i]);
    ++n;
  }
  return n ? s / n : 0.0;
}

}  // namespace flowfem::ref

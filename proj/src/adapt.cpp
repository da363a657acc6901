#include "flowfem/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowfem {

IndicatorField error_indicator(const TriMesh& m, const DataTerms& dt,
                               const RegField& reg, const FlowState& state,
                               int components) {
  const int nc = components;
  if (dt.width != m.width || dt.height != m.height)
    throw std::runtime_error("adapt.error_indicator: data terms do not match the mesh");

  // constant gradients of (u1, u2, mt) per triangle
  std::vector<double> grad(static_cast<size_t>(m.n_triangles) * 6, 0.0);
#pragma omp parallel for schedule(static)
  for (int t = 0; t < m.n_triangles; ++t) {
    double gx[3], gy[3];
    p1_gradients(m, t, gx, gy);
    const int* tv = &m.tri[static_cast<size_t>(t) * 3];
    double* g = &grad[static_cast<size_t>(t) * 6];
    for (int k = 0; k < 3; ++k) {
      const double u1 = state.u1[tv[k]], u2 = state.u2[tv[k]];
      g[0] += gx[k] * u1;
      g[1] += gy[k] * u1;
      g[2] += gx[k] * u2;
      g[3] += gy[k] * u2;
      if (nc == 3) {
        const double mt = state.mt[tv[k]];
        g[4] += gx[k] * mt;
        g[5] += gy[k] * mt;
      }
    }
  }

  // edge flux jumps, weighted by the larger neighbor coefficient
  const int ne = static_cast<int>(m.edges.size());
  std::vector<double> edge_term(ne, 0.0);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    const auto& ed = m.edges[e];
    double sum = 0.0;
    for (int c = 0; c < nc; ++c) {
      const auto coef = [&](int t) {
        return c < 2 ? reg.alpha[t] : reg.lambda[t];
      };
      const double* g0 = &grad[static_cast<size_t>(ed.t0) * 6 + c * 2];
      const double flux0 = coef(ed.t0) * (g0[0] * ed.nx + g0[1] * ed.ny);
      double jump, coef_e;
      if (ed.t1 >= 0) {
        const double* g1 = &grad[static_cast<size_t>(ed.t1) * 6 + c * 2];
        const double flux1 = coef(ed.t1) * (g1[0] * ed.nx + g1[1] * ed.ny);
        jump = flux0 - flux1;
        coef_e = std::max(coef(ed.t0), coef(ed.t1));
      } else {
        jump = flux0;  // exterior flux is zero under the natural condition
        coef_e = coef(ed.t0);
      }
      sum += jump * jump / coef_e;
    }
    edge_term[e] = ed.length * std::sqrt(sum);
  }

  IndicatorField ind;
  ind.eta.assign(m.n_triangles, 0.0);
  double eta_max = 0.0;
#pragma omp parallel for schedule(static) reduction(max : eta_max)
  for (int t = 0; t < m.n_triangles; ++t) {
    const int* tv = &m.tri[static_cast<size_t>(t) * 3];
    // element residual: P1 interpolant of the nodal strong residual
    double elem = 0.0;
    double R[3][3];  // [component][local vertex]
    for (int k = 0; k < 3; ++k) {
      const int v = tv[k];
      const double U[3] = {state.u1[v], state.u2[v], nc == 3 ? state.mt[v] : 0.0};
      const double a13 = nc == 3 ? dt.a13[v] : 0.0;
      const double a23 = nc == 3 ? dt.a23[v] : 0.0;
      R[0][k] = dt.f1[v] - (dt.a11[v] * U[0] + dt.a12[v] * U[1] + a13 * U[2]);
      R[1][k] = dt.f2[v] - (dt.a12[v] * U[0] + dt.a22[v] * U[1] + a23 * U[2]);
      if (nc == 3)
        R[2][k] = dt.f3[v] - (dt.a13[v] * U[0] + dt.a23[v] * U[1] + dt.a33[v] * U[2]);
    }
    for (int c = 0; c < nc; ++c) {
      const double s = R[c][0] + R[c][1] + R[c][2];
      const double sq = R[c][0] * R[c][0] + R[c][1] * R[c][1] + R[c][2] * R[c][2];
      const double l2 = m.area[t] / 12.0 * (s * s + sq);  // exact for P1 * P1
      elem += l2 / (c < 2 ? reg.alpha[t] : reg.lambda[t]);
    }
    double eta = m.hK[t] * std::sqrt(elem);
    for (int k = 0; k < 3; ++k)
      eta += 0.5 * edge_term[m.tri_edges[static_cast<size_t>(t) * 3 + k]];
    ind.eta[t] = eta;
    eta_max = std::max(eta_max, eta);
  }
  ind.eta_max = eta_max;
  return ind;
}

RegField update_alpha(const RegField& reg, const IndicatorField& ind,
                      const AdaptConfig& cfg) {
  RegField out = reg;
  if (ind.eta_max <= 0.0) return out;
  const int n = static_cast<int>(reg.alpha.size());
#pragma omp parallel for schedule(static)
  for (int t = 0; t < n; ++t) {
    const double excess = std::max(ind.eta[t] / ind.eta_max - cfg.eta_threshold, 0.0);
    out.alpha[t] = std::max(reg.alpha[t] / (1.0 + cfg.kappa * excess), cfg.alpha_th);
  }
  return out;
}

}  // namespace flowfem

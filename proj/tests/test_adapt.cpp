#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "fixtures.hpp"
#include "flowfem/adapt.hpp"
#include "flowfem/reference.hpp"

using namespace flowfem;

namespace {

DataTerms zero_terms(int w, int h) {
  DataTerms dt;
  dt.width = w;
  dt.height = h;
  const size_t n = static_cast<size_t>(w) * h;
  for (auto* f : {&dt.a11, &dt.a12, &dt.a13, &dt.a22, &dt.a23, &dt.a33, &dt.f1, &dt.f2,
                  &dt.f3, &dt.c})
    f->assign(n, 0.0);
  return dt;
}

bool has_boundary_edge(const TriMesh& m, int t) {
  for (int k = 0; k < 3; ++k)
    if (m.edges[m.tri_edges[static_cast<size_t>(t) * 3 + k]].t1 < 0) return true;
  return false;
}

}  // namespace

TEST_CASE("indicator matches the quadrature oracle") {
  for (int nc : {2, 3})
    for (unsigned seed : {2u, 7u, 19u}) {
      const int w = 9, h = 8;
      const TriMesh m = build_pixel_mesh(w, h);
      const DataTerms dt = fixtures::random_terms(w, h, seed);
      const FlowState state = fixtures::random_state(w, h, seed + 100);
      RegField reg = uniform_reg(m, 700.0, 1500.0);
      // perturb the coefficients so the weighted terms are exercised
      for (int t = 0; t < m.n_triangles; ++t) reg.alpha[t] *= 1.0 + 0.3 * ((t * 7) % 5);

      const IndicatorField a = error_indicator(m, dt, reg, state, nc);
      const IndicatorField b = ref::indicator_quadrature(m, dt, reg, state, nc);
      REQUIRE(a.eta.size() == b.eta.size());
      for (size_t t = 0; t < a.eta.size(); ++t)
        CHECK(a.eta[t] == doctest::Approx(b.eta[t]).epsilon(1e-10));
      CHECK(a.eta_max == doctest::Approx(b.eta_max).epsilon(1e-10));
    }
}

TEST_CASE("zero data and a constant state give a zero indicator") {
  const TriMesh m = build_pixel_mesh(7, 7);
  const DataTerms dt = zero_terms(7, 7);
  FlowState state;
  state.u1.assign(49, 0.4);
  state.u2.assign(49, -1.3);
  state.mt.assign(49, 2.0);
  const IndicatorField ind = error_indicator(m, dt, uniform_reg(m, 100.0, 100.0), state);
  CHECK(ind.eta_max == 0.0);
  for (double e : ind.eta) CHECK(e == 0.0);
}

TEST_CASE("zero data and a linear field flag only the boundary triangles") {
  // A globally linear field has a continuous constant flux, so interior jumps
  // vanish; the natural-condition mismatch survives on the outer edges only.
  const int w = 8, h = 6;
  const TriMesh m = build_pixel_mesh(w, h);
  const DataTerms dt = zero_terms(w, h);
  FlowState state;
  state.u1.resize(m.n_vertices);
  state.u2.assign(m.n_vertices, 0.0);
  state.mt.assign(m.n_vertices, 0.0);
  for (int v = 0; v < m.n_vertices; ++v) state.u1[v] = 0.5 + m.vx(v) + m.vy(v);
  const IndicatorField ind = error_indicator(m, dt, uniform_reg(m, 50.0, 50.0), state);
  CHECK(ind.eta_max > 0.0);
  for (int t = 0; t < m.n_triangles; ++t) {
    if (has_boundary_edge(m, t))
      CHECK(ind.eta[t] > 0.0);
    else
      CHECK(ind.eta[t] == 0.0);
  }
}

TEST_CASE("alpha update: worked example, threshold, and floor") {
  const TriMesh m = build_pixel_mesh(3, 2);  // 4 triangles
  const RegField reg = uniform_reg(m, 1000.0, 1000.0);
  AdaptConfig cfg;
  cfg.kappa = 10.0;
  cfg.eta_threshold = 0.1;
  cfg.alpha_th = 10.0;

  IndicatorField ind;
  ind.eta = {1.0, 0.05, 0.1, 0.55};
  ind.eta_max = 1.0;
  const RegField upd = update_alpha(reg, ind, cfg);
  CHECK(upd.alpha[0] == doctest::Approx(100.0).epsilon(1e-14));  // 1000/(1+10*0.9)
  CHECK(upd.alpha[1] == 1000.0);  // below the keep threshold
  CHECK(upd.alpha[2] == 1000.0);  // exactly at the threshold: zero excess
  CHECK(upd.alpha[3] == doctest::Approx(1000.0 / 5.5).epsilon(1e-14));
  CHECK(fixtures::bitwise_equal(upd.lambda, reg.lambda));

  // a huge kappa drives the loudest element onto the floor exactly
  cfg.kappa = 1e6;
  const RegField floored = update_alpha(reg, ind, cfg);
  CHECK(floored.alpha[0] == 10.0);

  // eta_max == 0 leaves everything alone
  IndicatorField quiet;
  quiet.eta.assign(4, 0.0);
  quiet.eta_max = 0.0;
  const RegField same = update_alpha(reg, quiet, cfg);
  CHECK(fixtures::bitwise_equal(same.alpha, reg.alpha));
  CHECK(fixtures::bitwise_equal(same.lambda, reg.lambda));
}

TEST_CASE("alpha is non-increasing under repeated updates") {
  const int w = 12, h = 10;
  const TriMesh m = build_pixel_mesh(w, h);
  const DataTerms dt = fixtures::random_terms(w, h, 77);
  const FlowState state = fixtures::random_state(w, h, 78);
  RegField reg = uniform_reg(m, 500.0, 500.0);
  AdaptConfig cfg;
  cfg.alpha_th = 5.0;
  for (int pass = 0; pass < 4; ++pass) {
    const IndicatorField ind = error_indicator(m, dt, reg, state);
    const RegField upd = update_alpha(reg, ind, cfg);
    for (int t = 0; t < m.n_triangles; ++t) {
      CHECK(upd.alpha[t] <= reg.alpha[t]);
      CHECK(upd.alpha[t] >= cfg.alpha_th);
    }
    CHECK(fixtures::bitwise_equal(upd.lambda, reg.lambda));
    reg = upd;
  }
}

TEST_CASE("thread count does not change the indicator") {
  const int w = 17, h = 13;
  const TriMesh m = build_pixel_mesh(w, h);
  const DataTerms dt = fixtures::random_terms(w, h, 5);
  const FlowState state = fixtures::random_state(w, h, 6);
  RegField reg = uniform_reg(m, 300.0, 900.0);
  for (int t = 0; t < m.n_triangles; ++t) reg.alpha[t] += (t % 11) * 40.0;

  omp_set_num_threads(1);
  const IndicatorField one = error_indicator(m, dt, reg, state);
  omp_set_num_threads(4);
  const IndicatorField four = error_indicator(m, dt, reg, state);
  omp_set_num_threads(omp_get_num_procs());

  CHECK(fixtures::bitwise_equal(one.eta, four.eta));
  CHECK(one.eta_max == four.eta_max);
}

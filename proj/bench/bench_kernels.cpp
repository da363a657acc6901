// Kernel benchmark: serial reference implementations against the OpenMP
// production kernels at 1 and N threads. Usage: bench_kernels [threads] [reps]
// (defaults: hardware threads, best of 5). Rows without a reference column
// have no size-feasible serial counterpart (the dense oracle is quadratic).

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "flowfem/adapt.hpp"
#include "flowfem/assembly.hpp"
#include "flowfem/imaging.hpp"
#include "flowfem/linsolve.hpp"
#include "flowfem/reference.hpp"

using namespace flowfem;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, el);
  }
  return best;
}

Image synthetic_frame(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = 0.5 + 0.3 * std::sin(0.37 * x) * std::cos(0.23 * y) +
                     0.15 * std::sin(0.11 * (x + y));
  return img;
}

FlowState synthetic_state(int w, int h) {
  FlowState s(w, h);
  for (int v = 0; v < w * h; ++v) {
    s.u1[v] = std::sin(0.05 * v);
    s.u2[v] = std::cos(0.07 * v);
    s.mt[v] = 0.1 * std::sin(0.03 * v);
  }
  return s;
}

void row(const char* name, double ref, double t1, double tn, int n) {
  char refs[32];
  if (ref > 0)
    std::snprintf(refs, sizeof refs, "%10.1f", ref * 1e3);
  else
    std::snprintf(refs, sizeof refs, "%10s", "-");
  std::printf("%-28s %s %10.1f %10.1f %9.2fx\n", name, refs, t1 * 1e3, tn * 1e3,
              tn > 0 ? t1 / tn : 0.0);
  (void)n;
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
  std::printf("kernel benchmark: %d threads vs 1, best of %d\n", threads, reps);
  std::printf("%-28s %10s %10s %10s %10s\n", "kernel", "ref ms", "1T ms", "NT ms", "speedup");

  // gaussian smoothing, 512x512, sigma 2
  {
    const Image img = synthetic_frame(512, 512);
    const double ref = best_of(reps, [&] { ref::gaussian_smooth_direct(img, 2.0); });
    omp_set_num_threads(1);
    const double t1 = best_of(reps, [&] { gaussian_smooth(img, 2.0); });
    omp_set_num_threads(threads);
    const double tn = best_of(reps, [&] { gaussian_smooth(img, 2.0); });
    row("smooth 512x512 s2", ref, t1, tn, threads);
  }

  // shared problem for the mesh kernels
  const int W = 256, H = 256;
  const Image f0 = synthetic_frame(W, H);
  Image f1(W, H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) f1.at(x, y) = f0.at(std::max(0, x - 1), y);
  const DerivativeField d = compute_derivatives(gaussian_smooth(f0, 1.0), gaussian_smooth(f1, 1.0));
  const DataTerms dt = build_data_terms(d, 2.5);
  const TriMesh m = build_pixel_mesh(W, H);
  const RegField reg = uniform_reg(m, 1000.0, 1000.0);
  const FlowState state = synthetic_state(W, H);

  // P1 system assembly, 3 components
  {
    omp_set_num_threads(1);
    const double t1 = best_of(reps, [&] { assemble(m, dt, reg, 3); });
    omp_set_num_threads(threads);
    const double tn = best_of(reps, [&] { assemble(m, dt, reg, 3); });
    row("assemble 256x256 3c", -1, t1, tn, threads);
  }

  // a posteriori error indicator
  {
    const double ref = best_of(reps, [&] { ref::indicator_quadrature(m, dt, reg, state, 3); });
    omp_set_num_threads(1);
    const double t1 = best_of(reps, [&] { error_indicator(m, dt, reg, state, 3); });
    omp_set_num_threads(threads);
    const double tn = best_of(reps, [&] { error_indicator(m, dt, reg, state, 3); });
    row("indicator 256x256 3c", ref, t1, tn, threads);
  }

  // sparse Cholesky numeric factorization (symbolic phase reused)
  {
    const TriMesh mc = build_pixel_mesh(96, 96);
    const Image c0 = synthetic_frame(96, 96);
    Image c1(96, 96);
    for (int y = 0; y < 96; ++y)
      for (int x = 0; x < 96; ++x) c1.at(x, y) = c0.at(std::max(0, x - 1), y);
    const DerivativeField dc =
        compute_derivatives(gaussian_smooth(c0, 1.0), gaussian_smooth(c1, 1.0));
    const DataTerms dtc = build_data_terms(dc, 2.5);
    const RegField regc = uniform_reg(mc, 1000.0, 1000.0);
    const SparseSystem sys = assemble(mc, dtc, regc, 3);
    SparseCholesky chol;
    chol.analyze(sys);
    const double t1 = best_of(reps, [&] { chol.factorize(sys, 1); });
    const double tn = best_of(reps, [&] { chol.factorize(sys, threads); });
    row("cholesky 96x96 3c", -1, t1, tn, threads);
  }

  // Jacobi-CG solve of a moderately stiff 256x256 system
  {
    const SparseSystem sys = assemble(m, dt, uniform_reg(m, 50.0, 50.0), 3);
    SolverConfig cfg;
    cfg.method = SolveMethod::ConjugateGradient;
    cfg.cg_tolerance = 1e-4;
    omp_set_num_threads(1);
    const double t1 = best_of(reps, [&] { cg_solve(sys, cfg); });
    omp_set_num_threads(threads);
    const double tn = best_of(reps, [&] { cg_solve(sys, cfg); });
    row("cg 256x256 3c tol 1e-4", -1, t1, tn, threads);
  }

  return 0;
}

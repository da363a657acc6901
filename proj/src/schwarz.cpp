#include "flowfem/schwarz.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace flowfem {

std::vector<SplitChoice> enumerate_splits(int width, int height, int n_parts) {
  if (n_parts < 1) throw std::runtime_error("schwarz.enumerate_splits: n_parts must be >= 1");
  std::vector<SplitChoice> out;
  for (int px = 1; px <= n_parts; ++px) {
    if (n_parts % px != 0) continue;
    const int py = n_parts / px;
    const double cw = double(width) / px, ch = double(height) / py;
    SplitChoice s;
    s.parts_x = px;
    s.parts_y = py;
    s.ratio = (cw * ch) / (2.0 * (cw + ch));
    out.push_back(s);
  }
  return out;
}

SplitChoice choose_split(int width, int height, int n_parts) {
  const auto all = enumerate_splits(width, height, n_parts);
  SplitChoice best = all.front();
  for (const auto& s : all) {
    const double tol = 1e-9 * std::max(1.0, best.ratio);
    if (s.ratio > best.ratio + tol)
      best = s;
    else if (std::abs(s.ratio - best.ratio) <= tol && s.parts_x >= s.parts_y &&
             best.parts_x < best.parts_y)
      best = s;
  }
  return best;
}

std::vector<int> assign_workers(int n_workers, int n_parts) {
  if (n_workers < 1 || n_parts < 1)
    throw std::runtime_error("schwarz.assign_workers: counts must be >= 1");
  std::vector<int> a(n_workers);
  for (int w = 0; w < n_workers; ++w) a[w] = w % n_parts;
  return a;
}

Partition build_partition(int width, int height, int parts_x, int parts_y, int overlap) {
  if (parts_x < 1 || parts_y < 1)
    throw std::runtime_error("schwarz.build_partition: part counts must be >= 1");
  if (overlap < 1 && parts_x * parts_y > 1)
    throw std::runtime_error("schwarz.build_partition: overlap must be >= 1");

  Partition part;
  part.width = width;
  part.height = height;
  part.parts_x = parts_x;
  part.parts_y = parts_y;
  part.overlap = overlap;

  std::vector<int> xs(parts_x + 1), ys(parts_y + 1);
  for (int i = 0; i <= parts_x; ++i) xs[i] = static_cast<int>(static_cast<long long>(i) * width / parts_x);
  for (int j = 0; j <= parts_y; ++j) ys[j] = static_cast<int>(static_cast<long long>(j) * height / parts_y);

  const int np = parts_x * parts_y;
  part.parts.resize(np);
  for (int j = 0; j < parts_y; ++j) {
    for (int i = 0; i < parts_x; ++i) {
      Subdomain& s = part.parts[j * parts_x + i];  // row-major part ids
      s.core = {xs[i], ys[j], xs[i + 1], ys[j + 1]};
      if (np > 1 && (s.core.w() <= 2 * overlap || s.core.h() <= 2 * overlap))
        throw std::runtime_error(
            "schwarz.build_partition: core " + std::to_string(s.core.w()) + "x" +
            std::to_string(s.core.h()) + " not larger than twice the overlap " +
            std::to_string(overlap));
      s.ext = {std::max(0, s.core.x0 - overlap), std::max(0, s.core.y0 - overlap),
               std::min(width, s.core.x1 + overlap), std::min(height, s.core.y1 + overlap)};
    }
  }

  auto owner = [&](int x, int y) {
    const int i = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    const int j = static_cast<int>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin()) - 1;
    return j * parts_x + i;
  };

  for (int p = 0; p < np; ++p) {
    Subdomain& s = part.parts[p];
    const Rect& e = s.ext;
    // artificial boundary: sides of the extended rectangle interior to the image
    std::vector<std::pair<int, int>> per_owner;  // (owner, vertex), boundary in order
    for (int y = e.y0; y < e.y1; ++y) {
      for (int x = e.x0; x < e.x1; ++x) {
        const bool ring = x == e.x0 || x == e.x1 - 1 || y == e.y0 || y == e.y1 - 1;
        if (!ring) {
          if (y != e.y0 && y != e.y1 - 1) { x = e.x1 - 2; continue; }  // skip interior run
          continue;
        }
        const bool artificial = (x == e.x0 && e.x0 > 0) || (x == e.x1 - 1 && e.x1 < width) ||
                                (y == e.y0 && e.y0 > 0) || (y == e.y1 - 1 && e.y1 < height);
        if (!artificial) continue;
        const int v = y * width + x;
        s.boundary.push_back(v);
        per_owner.emplace_back(owner(x, y), v);
      }
    }
    // group by owning part, vertex ids staying ascending within each group
    for (int q = 0; q < np; ++q) {
      if (q == p) continue;
      Subdomain::Neighbor nb;
      nb.part = q;
      for (const auto& [o, v] : per_owner)
        if (o == q) nb.gamma.push_back(v);
      if (nb.gamma.empty()) continue;
      const Rect& eq = part.parts[q].ext;
      nb.band = {std::max(e.x0, eq.x0), std::max(e.y0, eq.y0),
                 std::min(e.x1, eq.x1), std::min(e.y1, eq.y1)};
      s.neighbors.push_back(std::move(nb));
    }
  }
  return part;
}

namespace {

struct PartWorkspace {
  TriMesh mesh;
  DataTerms terms;
  std::vector<int> boundary_local;   // Dirichlet vertices, subdomain numbering
  SparseCholesky chol;
  std::vector<double> x_prev;        // warm start / factor-reuse companion
  int factored_version = -1;
  int group_size = 1;
};

DataTerms restrict_terms(const DataTerms& dt, const Rect& r) {
  DataTerms out;
  out.width = r.w();
  out.height = r.h();
  auto cut = [&](const std::vector<double>& src, std::vector<double>& dst) {
    dst.resize(static_cast<size_t>(r.w()) * r.h());
    for (int y = 0; y < r.h(); ++y) {
      const double* s = &src[static_cast<size_t>(y + r.y0) * dt.width + r.x0];
      std::copy(s, s + r.w(), &dst[static_cast<size_t>(y) * r.w()]);
    }
  };
  cut(dt.a11, out.a11); cut(dt.a12, out.a12); cut(dt.a13, out.a13);
  cut(dt.a22, out.a22); cut(dt.a23, out.a23); cut(dt.a33, out.a33);
  cut(dt.f1, out.f1);   cut(dt.f2, out.f2);   cut(dt.f3, out.f3);
  cut(dt.c, out.c);
  return out;
}

}  // namespace

FlowState schwarz_solve(const TriMesh& m, const DataTerms& dt, RegField& reg,
                        const Partition& part, const SchwarzOptions& opt,
                        SchwarzStats* stats) {
  if (part.width != m.width || part.height != m.height)
    throw std::runtime_error("schwarz.schwarz_solve: partition does not match the mesh");
  const int W = m.width, H = m.height, nc = opt.components;
  const int np = static_cast<int>(part.parts.size());
  const int workers = std::max(1, opt.workers);

  std::vector<PartWorkspace> ws(np);
  for (int p = 0; p < np; ++p) {
    const Rect& e = part.parts[p].ext;
    ws[p].mesh = build_pixel_mesh(e.w(), e.h());
    ws[p].terms = restrict_terms(dt, e);
    ws[p].boundary_local.reserve(part.parts[p].boundary.size());
    for (int gv : part.parts[p].boundary) {
      const int gx = gv % W, gy = gv / W;
      ws[p].boundary_local.push_back((gy - e.y0) * e.w() + (gx - e.x0));
    }
  }
  // worker groups: with workers >= parts the assignment w -> w % np spreads
  // extra workers over the parts' factorizations; otherwise each of the
  // `workers` threads walks parts round-robin alone
  const int outer = std::min(workers, np);
  for (int p = 0; p < np; ++p) ws[p].group_size = workers >= np ? 0 : 1;
  if (workers >= np)
    for (int w : assign_workers(workers, np)) ++ws[w].group_size;

  FlowState G(W, H);
  int alpha_version = 0;

  for (int iter = 0; iter < opt.n_iters; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    FlowState G_new(W, H);

    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto run_part = [&](int p) {
      const Subdomain& sd = part.parts[p];
      PartWorkspace& w = ws[p];
      const Rect& e = sd.ext;

      RegField sreg;
      const int ecw = e.w() - 1;
      sreg.alpha.resize(w.mesh.n_triangles);
      sreg.lambda.resize(w.mesh.n_triangles);
      for (int ly = 0; ly < e.h() - 1; ++ly)
        for (int lx = 0; lx < ecw; ++lx) {
          const int lt = 2 * (ly * ecw + lx);
          const int gt = 2 * ((ly + e.y0) * (W - 1) + lx + e.x0);
          sreg.alpha[lt] = reg.alpha[gt];
          sreg.alpha[lt + 1] = reg.alpha[gt + 1];
          sreg.lambda[lt] = reg.lambda[gt];
          sreg.lambda[lt + 1] = reg.lambda[gt + 1];
        }

      DirichletSet ds;
      ds.vertices = w.boundary_local;
      ds.values.resize(ds.vertices.size() * nc);
      for (size_t k = 0; k < sd.boundary.size(); ++k) {
        const int gv = sd.boundary[k];
        ds.values[k * nc + 0] = G.u1[gv];
        ds.values[k * nc + 1] = G.u2[gv];
        if (nc == 3) ds.values[k * nc + 2] = G.mt[gv];
      }

      SparseSystem sys = assemble(w.mesh, w.terms, sreg, nc, &ds);

      std::vector<double> x;
      bool zero_rhs = true;
      for (double v : sys.rhs)
        if (v != 0.0) { zero_rhs = false; break; }
      if (zero_rhs) {
        x.assign(sys.n, 0.0);
      } else if (opt.solver.method == SolveMethod::DirectCholesky) {
        if (!w.chol.analyzed()) w.chol.analyze(sys);
        if (w.factored_version != alpha_version) {
          w.chol.factorize(sys, w.group_size);
          w.factored_version = alpha_version;
        }
        x = w.chol.solve(sys.rhs);
        std::vector<double> Ax, r(sys.n);
        spmv(sys, x, Ax);
        for (int i = 0; i < sys.n; ++i) r[i] = sys.rhs[i] - Ax[i];
        const std::vector<double> dx = w.chol.solve(r);
        for (int i = 0; i < sys.n; ++i) x[i] += dx[i];
      } else {
        x = cg_solve(sys, opt.solver,
                     w.x_prev.size() == static_cast<size_t>(sys.n) ? &w.x_prev : nullptr,
                     nullptr);
      }
      w.x_prev = x;

      const FlowState local = expand_solution(w.mesh, sys, x);
      for (int y = sd.core.y0; y < sd.core.y1; ++y)
        for (int gx = sd.core.x0; gx < sd.core.x1; ++gx) {
          const int gv = y * W + gx;
          const int lv = (y - e.y0) * e.w() + (gx - e.x0);
          G_new.u1[gv] = local.u1[lv];
          G_new.u2[gv] = local.u2[lv];
          if (nc == 3) G_new.mt[gv] = local.mt[lv];
        }
    };

    auto guarded = [&](int p) {
      try {
        run_part(p);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    };

    if (outer <= 1) {
      omp_set_num_threads(std::max(1, workers >= np ? ws[0].group_size : 1));
      for (int p = 0; p < np; ++p) guarded(p);
    } else {
      // native threads so each part runs its own OpenMP team
      std::vector<std::thread> pool;
      pool.reserve(outer);
      for (int t = 0; t < outer; ++t) {
        pool.emplace_back([&, t] {
          for (int p = t; p < np; p += outer) {
            omp_set_num_threads(std::max(1, ws[p].group_size));
            guarded(p);
          }
        });
      }
      for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    double inc = 0.0;
    const size_t nv = G.u1.size();
    for (size_t i = 0; i < nv; ++i) {
      inc = std::max(inc, std::abs(G_new.u1[i] - G.u1[i]));
      inc = std::max(inc, std::abs(G_new.u2[i] - G.u2[i]));
      if (nc == 3) inc = std::max(inc, std::abs(G_new.mt[i] - G.mt[i]));
    }
    G = std::move(G_new);

    if (opt.adapt.enabled && iter < opt.adapt.n_adapt) {
      const IndicatorField ind = error_indicator(m, dt, reg, G, nc);
      reg = update_alpha(reg, ind, opt.adapt);
      ++alpha_version;
      if (stats) {
        stats->eta_max.push_back(ind.eta_max);
        if (opt.record_alpha_history) stats->alpha_history.push_back(reg.alpha);
      }
    }
    if (stats) {
      stats->increments.push_back(inc);
      stats->seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
  }
  return G;
}

}  // namespace flowfem

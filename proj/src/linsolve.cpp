#include "flowfem/linsolve.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flowfem {

namespace {

[[noreturn]] void fail(const std::string& op, const std::string& msg) {
  throw std::runtime_error("linsolve." + op + ": " + msg);
}

// block (free-vertex) adjacency of the scalar system; cols of the first
// component row cover all neighbor blocks
std::vector<std::vector<int>> block_adjacency(const SparseSystem& sys, int nb) {
  const int nc = sys.components;
  std::vector<std::vector<int>> adj(nb);
  for (int b = 0; b < nb; ++b) {
    const int row = b * nc;
    int last = -1;
    for (int q = sys.row_ptr[row]; q < sys.row_ptr[row + 1]; ++q) {
      const int nbk = sys.cols[q] / nc;
      if (nbk != b && nbk != last) adj[b].push_back(nbk);
      last = nbk;
    }
  }
  return adj;
}

}  // namespace

std::vector<int> rcm_order(const SparseSystem& sys) {
  const int nc = sys.components;
  if (sys.n % nc != 0) fail("rcm_order", "system size not a multiple of components");
  const int nb = sys.n / nc;
  const auto adj = block_adjacency(sys, nb);

  std::vector<int> degree(nb);
  for (int b = 0; b < nb; ++b) degree[b] = static_cast<int>(adj[b].size());

  std::vector<char> visited(nb, 0);
  std::vector<int> order;
  order.reserve(nb);
  std::vector<int> queue;
  queue.reserve(nb);
  std::vector<int> nbrs;

  int scanned = 0;
  while (static_cast<int>(order.size()) < nb) {
    // next start: unvisited vertex of minimum degree, smallest id on ties
    int start = -1;
    for (int b = scanned; b < nb; ++b)
      if (!visited[b] && (start < 0 || degree[b] < degree[start])) start = b;
    while (scanned < nb && visited[scanned]) ++scanned;
    visited[start] = 1;
    size_t head = order.size();
    order.push_back(start);
    while (head < order.size()) {
      const int v = order[head++];
      nbrs.clear();
      for (int w : adj[v])
        if (!visited[w]) nbrs.push_back(w);
      std::sort(nbrs.begin(), nbrs.end(), [&](int a, int b) {
        return degree[a] != degree[b] ? degree[a] < degree[b] : a < b;
      });
      for (int w : nbrs) {
        visited[w] = 1;
        order.push_back(w);
      }
    }
  }
  std::reverse(order.begin(), order.end());

  std::vector<int> perm(sys.n);
  for (int i = 0; i < nb; ++i)
    for (int c = 0; c < nc; ++c) perm[i * nc + c] = order[i] * nc + c;
  return perm;
}

struct SparseCholesky::Impl {
  int n = 0;
  std::vector<int> perm, iperm;      // new -> old, old -> new (scalar)
  std::vector<int> parent;           // elimination tree
  std::vector<size_t> Lp;            // column pointers, strictly lower part
  std::vector<int> Li;               // row ids per column, ascending
  std::vector<size_t> Rp;            // row-pattern pointers
  std::vector<int> Ri;               // columns of each row, ascending
  std::vector<size_t> Rpos;          // storage slot in Lx for each row entry
  std::vector<int> level_ptr_, level_nodes_;  // etree-height schedule
  std::vector<double> Lx, D;
  bool have_pattern = false, have_values = false;
};

SparseCholesky::SparseCholesky() : impl_(new Impl) {}
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

bool SparseCholesky::analyzed() const { return impl_->have_pattern; }
size_t SparseCholesky::factor_nonzeros() const { return impl_->Li.size() + impl_->D.size(); }

void SparseCholesky::analyze(const SparseSystem& sys) {
  Impl& im = *impl_;
  im.n = sys.n;
  im.perm = rcm_order(sys);
  im.iperm.resize(im.n);
  for (int k = 0; k < im.n; ++k) im.iperm[im.perm[k]] = k;

  // elimination tree (Liu), seeds are the permuted upper-triangle entries
  im.parent.assign(im.n, -1);
  std::vector<int> ancestor(im.n, -1);
  for (int k = 0; k < im.n; ++k) {
    const int r0 = im.perm[k];
    for (int q = sys.row_ptr[r0]; q < sys.row_ptr[r0 + 1]; ++q) {
      int i = im.iperm[sys.cols[q]];
      while (i != -1 && i < k) {
        const int next = ancestor[i];
        ancestor[i] = k;
        if (next == -1) {
          im.parent[i] = k;
          break;
        }
        i = next;
      }
    }
  }

  // row patterns by walking etree paths from the seeds (ereach)
  std::vector<int> mark(im.n, -1), path;
  std::vector<size_t> colcount(im.n, 0);
  std::vector<std::vector<int>> rows(im.n);
  size_t total = 0;
  for (int k = 0; k < im.n; ++k) {
    mark[k] = k;
    auto& rk = rows[k];
    const int r0 = im.perm[k];
    for (int q = sys.row_ptr[r0]; q < sys.row_ptr[r0 + 1]; ++q) {
      int i = im.iperm[sys.cols[q]];
      if (i >= k) continue;
      path.clear();
      while (mark[i] != k) {
        path.push_back(i);
        mark[i] = k;
        i = im.parent[i];
      }
      rk.insert(rk.end(), path.begin(), path.end());
    }
    std::sort(rk.begin(), rk.end());
    for (int i : rk) ++colcount[i];
    total += rk.size();
  }

  im.Lp.assign(im.n + 1, 0);
  for (int i = 0; i < im.n; ++i) im.Lp[i + 1] = im.Lp[i] + colcount[i];
  im.Li.resize(total);
  im.Rp.assign(im.n + 1, 0);
  im.Ri.resize(total);
  im.Rpos.resize(total);
  std::vector<size_t> fill(im.n, 0);
  size_t rp = 0;
  for (int k = 0; k < im.n; ++k) {
    im.Rp[k] = rp;
    for (int i : rows[k]) {
      const size_t p = im.Lp[i] + fill[i]++;
      im.Li[p] = k;
      im.Ri[rp] = i;
      im.Rpos[rp] = p;
      ++rp;
    }
  }
  im.Rp[im.n] = rp;

  // schedule rows by elimination-tree height
  std::vector<int> height(im.n, 0);
  int max_h = 0;
  for (int k = 0; k < im.n; ++k)
    if (im.parent[k] != -1) {
      height[im.parent[k]] = std::max(height[im.parent[k]], height[k] + 1);
      max_h = std::max(max_h, height[im.parent[k]]);
    }
  im.level_ptr_.assign(max_h + 2, 0);
  for (int k = 0; k < im.n; ++k) ++im.level_ptr_[height[k] + 1];
  for (int l = 0; l <= max_h; ++l) im.level_ptr_[l + 1] += im.level_ptr_[l];
  im.level_nodes_.resize(im.n);
  {
    std::vector<int> at(im.level_ptr_.begin(), im.level_ptr_.end() - 1);
    for (int k = 0; k < im.n; ++k) im.level_nodes_[at[height[k]]++] = k;
  }

  im.Lx.assign(total, 0.0);
  im.D.assign(im.n, 0.0);
  im.have_pattern = true;
  im.have_values = false;
}

void SparseCholesky::factorize(const SparseSystem& sys, int workers) {
  Impl& im = *impl_;
  if (!im.have_pattern) fail("cholesky", "factorize before analyze");
  if (sys.n != im.n) fail("cholesky", "matrix size changed since analyze");
  if (workers < 1) workers = 1;

  int bad_pivot = -1;
  const int n_levels = static_cast<int>(im.level_ptr_.size()) - 1;
#pragma omp parallel num_threads(workers)
  {
    std::vector<double> x(im.n, 0.0);
    for (int lev = 0; lev < n_levels; ++lev) {
      const int lo = im.level_ptr_[lev], hi = im.level_ptr_[lev + 1];
#pragma omp for schedule(static)
      for (int idx = lo; idx < hi; ++idx) {
        const int k = im.level_nodes_[idx];
        double d = 0.0;
        const int r0 = im.perm[k];
        for (int q = sys.row_ptr[r0]; q < sys.row_ptr[r0 + 1]; ++q) {
          const int j = im.iperm[sys.cols[q]];
          if (j < k)
            x[j] = sys.vals[q];
          else if (j == k)
            d = sys.vals[q];
        }
        for (size_t rp = im.Rp[k]; rp < im.Rp[k + 1]; ++rp) {
          const int i = im.Ri[rp];
          const double lki = x[i] / im.D[i];
          x[i] = 0.0;
          const size_t pend = im.Rpos[rp];
          for (size_t p = im.Lp[i]; p < pend; ++p) x[im.Li[p]] -= im.Lx[p] * lki;
          im.Lx[pend] = lki;
          d -= lki * lki;
        }
        if (d <= 0.0 || !std::isfinite(d)) {
#pragma omp critical
          if (bad_pivot < 0 || k < bad_pivot) bad_pivot = k;
          im.D[k] = 1.0;  // keep going; error raised after the region
        } else {
          im.D[k] = std::sqrt(d);
        }
      }
      // implicit barrier of omp for orders the levels
    }
  }
  if (bad_pivot >= 0)
    fail("cholesky", "breakdown at pivot " + std::to_string(bad_pivot) +
                         " (unknown " + std::to_string(im.perm[bad_pivot]) +
                         "): matrix is not positive definite");
  im.have_values = true;
}

std::vector<double> SparseCholesky::solve(const std::vector<double>& b) const {
  const Impl& im = *impl_;
  if (!im.have_values) fail("cholesky", "solve before factorize");
  if (static_cast<int>(b.size()) != im.n) fail("cholesky", "rhs size mismatch");

  std::vector<double> x(im.n);
  for (int k = 0; k < im.n; ++k) x[k] = b[im.perm[k]];
  for (int j = 0; j < im.n; ++j) {  // L y = b
    const double yj = x[j] / im.D[j];
    x[j] = yj;
    for (size_t p = im.Lp[j]; p < im.Lp[j + 1]; ++p) x[im.Li[p]] -= im.Lx[p] * yj;
  }
  for (int j = im.n - 1; j >= 0; --j) {  // L^T x = y
    double s = x[j];
    for (size_t p = im.Lp[j]; p < im.Lp[j + 1]; ++p) s -= im.Lx[p] * x[im.Li[p]];
    x[j] = s / im.D[j];
  }
  std::vector<double> out(im.n);
  for (int k = 0; k < im.n; ++k) out[im.perm[k]] = x[k];
  return out;
}

namespace {

// fixed-chunk reduction: partials are summed serially in chunk order, so the
// result does not depend on the number of workers
double det_dot(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  constexpr int chunk = 8192;
  const int nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(nchunks);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < nchunks; ++c) {
    const int lo = c * chunk, hi = std::min(n, lo + chunk);
    double s = 0.0;
    for (int i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[c] = s;
  }
  double s = 0.0;
  for (int c = 0; c < nchunks; ++c) s += partial[c];
  return s;
}

}  // namespace

std::vector<double> cg_solve(const SparseSystem& sys, const SolverConfig& cfg,
                             const std::vector<double>* warm_start, SolveReport* report) {
  const int n = sys.n;
  const std::vector<double>& b = sys.rhs;

  std::vector<double> diag(n);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n; ++r) {
    double d = 0.0;
    for (int q = sys.row_ptr[r]; q < sys.row_ptr[r + 1]; ++q)
      if (sys.cols[q] == r) d = sys.vals[q];
    diag[r] = d;
  }
  for (int r = 0; r < n; ++r)
    if (!(diag[r] > 0.0)) fail("cg", "non-positive diagonal at row " + std::to_string(r));

  const double normb = std::sqrt(det_dot(b, b));
  std::vector<double> x(n, 0.0);
  if (warm_start && static_cast<int>(warm_start->size()) == n) x = *warm_start;
  if (normb == 0.0) {
    if (report) *report = {0, 0.0};
    return std::vector<double>(n, 0.0);
  }

  std::vector<double> r(n), z(n), p(n), Ap(n);
  spmv(sys, x, Ap);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    r[i] = b[i] - Ap[i];
    z[i] = r[i] / diag[i];
    p[i] = z[i];
  }
  double rz = det_dot(r, z);
  double res = std::sqrt(det_dot(r, r)) / normb;

  const int max_iters = cfg.cg_max_iters > 0 ? cfg.cg_max_iters : 10 * n;
  int it = 0;
  while (res > cfg.cg_tolerance && it < max_iters) {
    ++it;
    spmv(sys, p, Ap);
    const double pAp = det_dot(p, Ap);
    if (pAp <= 0.0) fail("cg", "indefinite matrix detected at iteration " + std::to_string(it));
    const double alpha = rz / pAp;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    res = std::sqrt(det_dot(r, r)) / normb;
    if (res <= cfg.cg_tolerance) break;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = det_dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (report) *report = {it, res};
  if (res > cfg.cg_tolerance)
    fail("cg", "no convergence after " + std::to_string(it) +
                   " iterations, relative residual " + std::to_string(res));
  return x;
}

std::vector<double> solve(const SparseSystem& sys, const SolverConfig& cfg,
                          SolveReport* report, const std::vector<double>* warm_start) {
  bool all_zero = true;
  for (double v : sys.rhs)
    if (v != 0.0) { all_zero = false; break; }
  if (all_zero) {
    if (report) *report = {0, 0.0};
    return std::vector<double>(sys.n, 0.0);
  }

  if (cfg.method == SolveMethod::ConjugateGradient)
    return cg_solve(sys, cfg, warm_start, report);

  SparseCholesky chol;
  chol.analyze(sys);
  chol.factorize(sys, cfg.factor_workers);
  std::vector<double> x = chol.solve(sys.rhs);

  // one step of iterative refinement
  std::vector<double> Ax(sys.n), r(sys.n);
  spmv(sys, x, Ax);
  for (int i = 0; i < sys.n; ++i) r[i] = sys.rhs[i] - Ax[i];
  const std::vector<double> dx = chol.solve(r);
  for (int i = 0; i < sys.n; ++i) x[i] += dx[i];

  if (report) {
    spmv(sys, x, Ax);
    double rn = 0.0, bn = 0.0;
    for (int i = 0; i < sys.n; ++i) {
      const double d = sys.rhs[i] - Ax[i];
      rn += d * d;
      bn += sys.rhs[i] * sys.rhs[i];
    }
    *report = {0, bn > 0 ? std::sqrt(rn / bn) : 0.0};
  }
  return x;
}

}  // namespace flowfem

#pragma once

#include <memory>
#include <vector>

#include "flowfem/assembly.hpp"

namespace flowfem {

enum class SolveMethod { DirectCholesky, ConjugateGradient };

struct SolverConfig {
  SolveMethod method = SolveMethod::DirectCholesky;
  double cg_tolerance = 1e-10;  // relative residual
  int cg_max_iters = 0;         // 0 -> 10 * n
  int factor_workers = 1;       // threads for the numeric factorization
};

struct SolveReport {
  int iterations = 0;      // CG iterations (0 for direct)
  double residual = 0.0;   // final relative residual
};

/// Reverse Cuthill-McKee ordering of the free-vertex graph of sys, expanded
/// to scalar unknowns (vertex major, component minor).
std::vector<int> rcm_order(const SparseSystem& sys);

/// Sparse Cholesky (up-looking, elimination-tree based) with RCM
/// pre-ordering. The symbolic pattern depends only on the matrix pattern and
/// can be reused across refactorizations; the numeric phase is level-scheduled
/// across etree heights and bitwise deterministic in the worker count.
class SparseCholesky {
 public:
  SparseCholesky();
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;

  void analyze(const SparseSystem& sys);               // symbolic phase
  void factorize(const SparseSystem& sys, int workers = 1);  // numeric phase
  bool analyzed() const;
  std::vector<double> solve(const std::vector<double>& b) const;
  size_t factor_nonzeros() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Jacobi-preconditioned conjugate gradient. Deterministic for a fixed
/// matrix: reductions use fixed-size chunks independent of the worker count.
/// Throws on non-convergence, reporting iterations and the final residual.
std::vector<double> cg_solve(const SparseSystem& sys, const SolverConfig& cfg,
                             const std::vector<double>* warm_start = nullptr,
                             SolveReport* report = nullptr);

/// Solves sys.rhs with the configured method; zero right-hand side
/// short-circuits to the zero vector. Direct solves apply one step of
/// iterative refinement.
std::vector<double> solve(const SparseSystem& sys, const SolverConfig& cfg,
                          SolveReport* report = nullptr,
                          const std::vector<double>* warm_start = nullptr);

}  // namespace flowfem

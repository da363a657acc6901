#pragma once

#include <vector>

#include "flowfem/imaging.hpp"
#include "flowfem/mesh.hpp"

namespace flowfem {

/// Vertex-valued solution fields on the pixel grid.
struct FlowState {
  int width = 0;
  int height = 0;
  std::vector<double> u1, u2, mt;

  FlowState() = default;
  FlowState(int w, int h)
      : width(w), height(h),
        u1(static_cast<size_t>(w) * h, 0.0),
        u2(static_cast<size_t>(w) * h, 0.0),
        mt(static_cast<size_t>(w) * h, 0.0) {}
};

/// Per-triangle regularization weights.
struct RegField {
  std::vector<double> alpha;
  std::vector<double> lambda;
};

RegField uniform_reg(const TriMesh& m, double alpha0, double lambda0);

/// Dirichlet constraints: `components` values per vertex, fixing
/// (u1, u2[, mt]) at vertices[k].
struct DirichletSet {
  std::vector<int> vertices;
  std::vector<double> values;

  bool empty() const { return vertices.empty(); }
};

/// Symmetric sparse system over the free scalar unknowns, CSR with both
/// triangles stored. Unknown layout: free vertex major, component minor.
struct SparseSystem {
  int n = 0;           // scalar unknowns
  int components = 3;  // 3 with illumination, 2 without
  std::vector<int> row_ptr, cols;
  std::vector<double> vals;
  std::vector<double> rhs;

  std::vector<int> vert_to_free;  // per mesh vertex: free index or -1
  std::vector<int> free_to_vert;
  DirichletSet constraints;
};

/// Galerkin system for the coupled flow equations: P1 stiffness with
/// per-triangle weights (alpha, alpha, lambda) plus vertex-lumped reaction
/// and load from the data terms. Constrained rows are eliminated
/// symmetrically into the right-hand side.
SparseSystem assemble(const TriMesh& m, const DataTerms& dt, const RegField& reg,
                      int components, const DirichletSet* dirichlet = nullptr);

/// Re-inserts a solution vector of the free unknowns into a FlowState,
/// filling constrained vertices from the Dirichlet values.
FlowState expand_solution(const TriMesh& m, const SparseSystem& sys,
                          const std::vector<double>& x);

/// Gathers a FlowState into the free-unknown layout of sys.
std::vector<double> flatten_state(const SparseSystem& sys, const FlowState& state);

/// Discrete energy of a state; its gradient w.r.t. the free unknowns of the
/// unconstrained system is exactly A*x - b.
double energy(const TriMesh& m, const DataTerms& dt, const RegField& reg,
              const FlowState& state, int components = 3);

/// y = A*x for the assembled system (deterministic row-parallel).
void spmv(const SparseSystem& sys, const std::vector<double>& x, std::vector<double>& y);

}  // namespace flowfem

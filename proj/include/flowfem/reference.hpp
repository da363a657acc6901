#pragma once

// Serial reference implementations, deliberately written the naive way
// (dense matrices, direct summation, quadrature). They back the unit and
// acceptance tests as independent oracles and the kernel benchmark as the
// baseline; nothing here is used by the production pipeline.

#include <vector>

#include "flowfem/adapt.hpp"
#include "flowfem/assembly.hpp"
#include "flowfem/imaging.hpp"
#include "flowfem/metrics.hpp"

namespace flowfem::ref {

/// Direct 2D accumulation with the same truncated, renormalized kernel and
/// symmetric reflection as the production smoother.
Image gaussian_smooth_direct(const Image& img, double sigma);

struct DenseSystem {
  int n = 0;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
};

/// Element-by-element dense assembly with scatter, symmetric elimination of
/// Dirichlet rows/columns.
DenseSystem assemble_dense(const TriMesh& m, const DataTerms& dt, const RegField& reg,
                           int components, const DirichletSet* dirichlet = nullptr);

/// Dense LDL^T solve with symmetric pivoting-free elimination.
std::vector<double> solve_dense(DenseSystem sys);

/// Indicator recomputed with explicit quadrature: three-midpoint rule for the
/// element residual (exact for the quadratic integrand), direct edge sums for
/// the jumps.
IndicatorField indicator_quadrature(const TriMesh& m, const DataTerms& dt,
                                    const RegField& reg, const FlowState& state,
                                    int components = 3);

double aae_direct(const FlowState& flow, const FloField& truth);
double ee_direct(const FlowState& flow, const FloField& truth);

}  // namespace flowfem::ref

#pragma once

#include <vector>

#include "flowfem/assembly.hpp"

namespace flowfem {

struct IndicatorField {
  std::vector<double> eta;  // per triangle
  double eta_max = 0.0;
};

/// Residual-based a posteriori indicator per triangle:
///   eta_K = h_K * ||R||_{0,K,weighted} + 1/2 * sum_e h_e * ||J||_{e,weighted}
/// with R the P1 interpolant of the nodal strong residual F - A_rho U,
/// J the jump of the diffusive flux across edges (full flux on boundary
/// edges), and components weighted by 1/sqrt(alpha resp. lambda); edge
/// weights use the larger coefficient of the two neighbors.
IndicatorField error_indicator(const TriMesh& m, const DataTerms& dt,
                               const RegField& reg, const FlowState& state,
                               int components = 3);

struct AdaptConfig {
  bool enabled = true;
  double kappa = 10.0;
  double eta_threshold = 0.1;  // fraction of eta_max below which alpha is kept
  double alpha_th = 10.0;      // lower bound for alpha
  int n_adapt = 10;            // iterations that update alpha
};

/// One multiplicative alpha update; lambda is left untouched and alpha never
/// drops below alpha_th. eta_max == 0 leaves the field unchanged.
RegField update_alpha(const RegField& reg, const IndicatorField& ind,
                      const AdaptConfig& cfg);

}  // namespace flowfem

#pragma once

#include <vector>

#include "flowfem/adapt.hpp"
#include "flowfem/assembly.hpp"
#include "flowfem/linsolve.hpp"

namespace flowfem {

struct SplitChoice {
  int parts_x = 1;
  int parts_y = 1;
  double ratio = 0.0;  // interior cells per interface cell
};

/// All factorizations px*py == n_parts with their area/perimeter ratios.
std::vector<SplitChoice> enumerate_splits(int width, int height, int n_parts);

/// Factorization maximizing the ratio; ties prefer parts_x >= parts_y.
SplitChoice choose_split(int width, int height, int n_parts);

struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open pixel ranges

  int w() const { return x1 - x0; }
  int h() const { return y1 - y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

struct Subdomain {
  Rect core;      // owned pixels, disjoint across parts
  Rect ext;       // core grown by the overlap, clipped to the image
  struct Neighbor {
    int part;
    Rect band;                 // ext-ext intersection
    std::vector<int> gamma;    // artificial-boundary vertices supplied by `part`
  };
  std::vector<Neighbor> neighbors;
  std::vector<int> boundary;   // union of all gamma lists, ascending global ids
};

struct Partition {
  int width = 0, height = 0;
  int parts_x = 1, parts_y = 1;
  int overlap = 0;
  std::vector<Subdomain> parts;
};

/// Near-equal rectangular cores grown by `overlap` pixels. Requires every
/// core to be wider and taller than 2*overlap so extended rectangles only
/// reach adjacent cores.
Partition build_partition(int width, int height, int parts_x, int parts_y, int overlap);

/// Worker w serves part (w % n_parts); the per-part group sizes are the
/// factorization worker counts.
std::vector<int> assign_workers(int n_workers, int n_parts);

struct SchwarzOptions {
  int n_iters = 10;
  int workers = 1;
  int components = 3;
  AdaptConfig adapt;              // adapt.enabled == false -> fixed alpha
  SolverConfig solver;
  bool record_alpha_history = false;
};

struct SchwarzStats {
  std::vector<double> increments;     // max-norm change of the composed field
  std::vector<double> seconds;        // wall time per iteration
  std::vector<double> eta_max;        // indicator max per adapt update
  std::vector<std::vector<double>> alpha_history;  // snapshots after updates
};

/// Synchronous overlapping additive Schwarz: every iteration solves all
/// subdomain problems against the previous composed field's traces, then
/// recomposes by core restriction. Returns the composed field after n_iters;
/// reg is updated in place when adaptation is on.
FlowState schwarz_solve(const TriMesh& m, const DataTerms& dt, RegField& reg,
                        const Partition& part, const SchwarzOptions& opt,
                        SchwarzStats* stats = nullptr);

}  // namespace flowfem

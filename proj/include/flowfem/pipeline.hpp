#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowfem/metrics.hpp"
#include "flowfem/schwarz.hpp"

namespace flowfem {

struct RunConfig {
  std::string frame0, frame1;

  double sigma = 1.0;
  double rho = 2.5;
  double alpha0 = 1000.0;
  double lambda0 = 1000.0;
  bool illumination = true;

  int parts = 4;
  int overlap = 5;
  int schwarz_iters = 10;
  int workers = 4;

  bool adapt = true;
  double kappa = 10.0;
  double eta_threshold = 0.1;
  std::optional<double> alpha_th;  // default alpha0 / 100
  int adapt_iters = 10;

  std::string solver = "auto";  // auto | cholesky | cg
  double cg_tolerance = 1e-10;

  std::string ground_truth;
  std::string out_flo, out_png, out_metrics, out_increments;
  std::string dump_alpha, dump_mt;
};

struct RunResult {
  FlowState flow;
  RegField reg;
  SchwarzStats stats;
  std::optional<FlowMetrics> metrics;
  int width = 0, height = 0;
};

/// Loads frames, builds data terms, runs the Schwarz/adaptation loop and
/// writes the requested artifacts.
RunResult run_pipeline(const RunConfig& cfg);

/// Same solve from in-memory frames (no file IO).
RunResult run_on_frames(const Image& f0, const Image& f1, const RunConfig& cfg);

/// Scales frame intensities by `gain` (clamped to [0,1]); used to produce
/// illumination-change fixtures.
Image scale_brightness(const Image& img, double gain);

}  // namespace flowfem

#include "flowfem/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace flowfem {

namespace {

// direct factorization limit: beyond this many scalar unknowns per subdomain
// the fill-in no longer pays off against a warm-started CG
constexpr int kDirectLimit = 20000;

SolveMethod pick_method(const std::string& solver, const Partition& part, int nc) {
  if (solver == "cholesky") return SolveMethod::DirectCholesky;
  if (solver == "cg") return SolveMethod::ConjugateGradient;
  if (solver != "auto")
    throw std::runtime_error("cli.solver: unknown solver '" + solver +
                             "' (want auto, cholesky or cg)");
  size_t max_unknowns = 0;
  for (const auto& p : part.parts)
    max_unknowns = std::max(max_unknowns,
                            static_cast<size_t>(p.ext.w()) * p.ext.h() * nc);
  return max_unknowns <= kDirectLimit ? SolveMethod::DirectCholesky
                                      : SolveMethod::ConjugateGradient;
}

}  // namespace

Image scale_brightness(const Image& img, double gain) {
  Image out = img;
  for (auto& v : out.data) v = std::clamp(v * gain, 0.0, 1.0);
  return out;
}

RunResult run_on_frames(const Image& f0, const Image& f1, const RunConfig& cfg) {
  if (f0.width != f1.width || f0.height != f1.height)
    throw std::runtime_error("cli.run: frame sizes differ");
  if (f0.width < 2 || f0.height < 2)
    throw std::runtime_error("cli.run: frames must be at least 2x2");
  if (cfg.solver != "auto" && cfg.solver != "cholesky" && cfg.solver != "cg")
    throw std::runtime_error("cli.solver: unknown solver '" + cfg.solver +
                             "' (want auto, cholesky or cg)");

  const Image s0 = gaussian_smooth(f0, cfg.sigma);
  const Image s1 = gaussian_smooth(f1, cfg.sigma);
  const DerivativeField deriv = compute_derivatives(s0, s1);
  const DataTerms dt = build_data_terms(deriv, cfg.rho);

  const TriMesh mesh = build_pixel_mesh(f0.width, f0.height);
  RegField reg = uniform_reg(mesh, cfg.alpha0, cfg.lambda0);

  const SplitChoice split = choose_split(f0.width, f0.height, cfg.parts);
  const Partition part =
      build_partition(f0.width, f0.height, split.parts_x, split.parts_y, cfg.overlap);

  const int nc = cfg.illumination ? 3 : 2;
  SchwarzOptions opt;
  opt.n_iters = cfg.schwarz_iters;
  opt.workers = cfg.workers;
  opt.components = nc;
  opt.adapt.enabled = cfg.adapt;
  opt.adapt.kappa = cfg.kappa;
  opt.adapt.eta_threshold = cfg.eta_threshold;
  opt.adapt.alpha_th = cfg.alpha_th.value_or(cfg.alpha0 / 100.0);
  opt.adapt.n_adapt = cfg.adapt_iters;
  opt.solver.method = pick_method(cfg.solver, part, nc);
  opt.solver.cg_tolerance = cfg.cg_tolerance;

  RunResult res;
  res.width = f0.width;
  res.height = f0.height;
  res.flow = schwarz_solve(mesh, dt, reg, part, opt, &res.stats);
  res.reg = std::move(reg);
  return res;
}

namespace {

void write_artifacts(const RunResult& res, const RunConfig& cfg) {
  if (!cfg.out_flo.empty()) write_flo(cfg.out_flo, to_flo(res.flow));
  if (!cfg.out_png.empty()) save_png_rgb(cfg.out_png, colorize_flow(res.flow));
  if (!cfg.out_increments.empty()) {
    std::ofstream out(cfg.out_increments);
    if (!out) throw std::runtime_error("cli.out_increments: cannot open " + cfg.out_increments);
    out << "iteration,increment,seconds\n";
    for (size_t i = 0; i < res.stats.increments.size(); ++i)
      out << i + 1 << "," << res.stats.increments[i] << "," << res.stats.seconds[i] << "\n";
  }
  if (!cfg.out_metrics.empty()) {
    std::ofstream out(cfg.out_metrics);
    if (!out) throw std::runtime_error("cli.out_metrics: cannot open " + cfg.out_metrics);
    out << "mode,aae_deg,ee,valid_pixels\n";
    if (res.metrics)
      out << (cfg.illumination ? "illum_on" : "illum_off") << "," << res.metrics->aae_deg
          << "," << res.metrics->ee << "," << res.metrics->valid << "\n";
  }
  if (!cfg.dump_alpha.empty()) {
    const TriMesh mesh = build_pixel_mesh(res.width, res.height);
    save_pgm(cfg.dump_alpha, rasterize_triangle_field(mesh, res.reg.alpha));
  }
  if (!cfg.dump_mt.empty())
    save_png_rgb(cfg.dump_mt, colorize_signed(res.flow.mt, res.width, res.height));
}

}  // namespace

RunResult run_pipeline(const RunConfig& cfg) {
  if (cfg.frame0.empty() || cfg.frame1.empty())
    throw std::runtime_error("cli.run: both frames are required");
  const Image f0 = load_image(cfg.frame0);
  const Image f1 = load_image(cfg.frame1);
  RunResult res = run_on_frames(f0, f1, cfg);
  if (!cfg.ground_truth.empty())
    res.metrics = compute_metrics(res.flow, read_flo(cfg.ground_truth));
  write_artifacts(res, cfg);
  return res;
}

}  // namespace flowfem

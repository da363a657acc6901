// Acceptance gate: eleven criteria, one [PASS]/[FAIL]/[SKIP] line each.
// Run without arguments for the full suite, or pass criterion numbers to
// run a subset (e.g. `acceptance 3 10`). Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "flowfem/pipeline.hpp"
#include "flowfem/reference.hpp"

using namespace flowfem;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, bool pass, const std::string& detail) {
  std::printf("[%s] %2d. %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
}

void report_skip(int id, const std::string& detail) {
  std::printf("[SKIP] %2d. %s\n", id, detail.c_str());
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double state_max(const FlowState& s) {
  return std::max({max_abs(s.u1), max_abs(s.u2), max_abs(s.mt)});
}

double state_diff(const FlowState& a, const FlowState& b) {
  double d = fixtures::max_abs_diff(a.u1, b.u1);
  d = std::max(d, fixtures::max_abs_diff(a.u2, b.u2));
  d = std::max(d, fixtures::max_abs_diff(a.mt, b.mt));
  return d;
}

bool state_bits(const FlowState& a, const FlowState& b) {
  return fixtures::bitwise_equal(a.u1, b.u1) && fixtures::bitwise_equal(a.u2, b.u2) &&
         fixtures::bitwise_equal(a.mt, b.mt);
}

FlowState monolithic(const TriMesh& m, const DataTerms& dt, const RegField& reg, int nc) {
  const SparseSystem s = assemble(m, dt, reg, nc);
  SolverConfig cfg;
  return expand_solution(m, s, solve(s, cfg));
}

// ---------------------------------------------------------------- fixtures

// long-wavelength texture bounded to [0.1, 0.7]; a 1.2x gain cannot clamp
double tex_bg(double x, double y) {
  return 0.4 + 0.2 * std::sin(2.0 * M_PI * x / 11.3 + 0.7) * std::cos(2.0 * M_PI * y / 14.7) +
         0.1 * std::sin(2.0 * M_PI * (x + y) / 17.9);
}
double tex_sq(double x, double y) {
  return 0.4 + 0.2 * std::sin(2.0 * M_PI * x / 7.9) * std::sin(2.0 * M_PI * y / 9.3) +
         0.1 * std::cos(2.0 * M_PI * (x - y) / 12.7);
}

struct GainSquare {
  Image f0, f1;
  FloField truth;
};

// textured square translating one pixel over a static background, both
// textures bounded away from the clamp range
GainSquare bounded_square_pair(int W, int H, int sx, int sy, int ss, double gain) {
  GainSquare g{Image(W, H), Image(W, H), FloField(W, H)};
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      g.f0.at(x, y) = tex_bg(x, y);
      g.f1.at(x, y) = tex_bg(x, y);
    }
  for (int y = sy; y < sy + ss; ++y)
    for (int x = sx; x < sx + ss; ++x) {
      g.f0.at(x, y) = tex_sq(x - sx, y - sy);
      g.f1.at(x + 1, y) = tex_sq(x - sx, y - sy);
      g.truth.u[static_cast<size_t>(y) * W + x] = 1.0f;
    }
  if (gain != 1.0) g.f1 = scale_brightness(g.f1, gain);
  return g;
}

DataTerms pattern_terms(int W, int H, double sx, double sy) {
  const Image f0 = fixtures::pattern_frame(W, H);
  const Image f1 = fixtures::pattern_frame(W, H, sx, sy);
  return fixtures::terms_from_frames(f0, f1, 0.8, 1.5);
}

// ---------------------------------------------------------------- criteria

bool criterion1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    const int W = 8, H = 8;
    const Image f0 = fixtures::random_image(W, H, seed);
    const Image f1 = fixtures::random_image(W, H, seed + 1000);
    const DataTerms dt = fixtures::terms_from_frames(f0, f1, 0.5, 1.0);
    const TriMesh m = build_pixel_mesh(W, H);
    const RegField reg = uniform_reg(m, 0.05 * (1 + seed % 5), 0.08 * (1 + seed % 3));

    const SparseSystem s = assemble(m, dt, reg, 3);
    SolverConfig cfg;
    const std::vector<double> x = solve(s, cfg);
    const std::vector<double> xd = ref::solve_dense(ref::assemble_dense(m, dt, reg, 3));
    worst = std::max(worst, fixtures::rel_err(x, xd));
  }
  const double el = seconds_since(t0);
  const bool ok = worst <= 1e-8 && el < 10.0;
  report(1, ok, fmt("sparse solve vs dense oracle on 20 random pairs (max rel %.2e, %.2f s)",
                    worst, el));
  return ok;
}

bool criterion2() {
  const int W = 10, H = 10;
  const TriMesh m = build_pixel_mesh(W, H);
  const double h = 1e-6;
  double worst = 0.0;
  for (unsigned seed = 0; seed < 10; ++seed) {
    const DataTerms dt = fixtures::random_terms(W, H, 300 + seed);
    const RegField reg = uniform_reg(m, 0.7, 1.3);
    const FlowState state = fixtures::random_state(W, H, 400 + seed);
    const SparseSystem s = assemble(m, dt, reg, 3);
    std::vector<double> x = flatten_state(s, state);

    std::vector<double> grad(s.n);
    spmv(s, x, grad);
    for (int i = 0; i < s.n; ++i) grad[i] -= s.rhs[i];

    std::vector<double> fd(s.n);
    for (int i = 0; i < s.n; ++i) {
      const double keep = x[i];
      x[i] = keep + h;
      const double ep = energy(m, dt, reg, expand_solution(m, s, x), 3);
      x[i] = keep - h;
      const double em = energy(m, dt, reg, expand_solution(m, s, x), 3);
      x[i] = keep;
      fd[i] = (ep - em) / (2.0 * h);
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < s.n; ++i) {
      num += (fd[i] - grad[i]) * (fd[i] - grad[i]);
      den += grad[i] * grad[i];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  const bool ok = worst <= 1e-5;
  report(2, ok, fmt("finite-difference energy gradient equals A*U - b (max rel %.2e)", worst));
  return ok;
}

// shared by criteria 3 and 10
struct SchwarzRun {
  FlowState flow;
  SchwarzStats stats;
};

SchwarzRun run_c3(int workers) {
  const int W = 32, H = 32;
  const DataTerms dt = pattern_terms(W, H, 0.5, 0.2);
  const TriMesh m = build_pixel_mesh(W, H);
  RegField reg = uniform_reg(m, 0.05, 0.05);
  const Partition p = build_partition(W, H, 2, 2, 5);
  SchwarzOptions opt;
  opt.n_iters = 20;
  opt.workers = workers;
  opt.adapt.enabled = false;
  SchwarzRun r;
  r.flow = schwarz_solve(m, dt, reg, p, opt, &r.stats);
  return r;
}

bool criterion3() {
  const int W = 32, H = 32;
  const DataTerms dt = pattern_terms(W, H, 0.5, 0.2);
  const TriMesh m = build_pixel_mesh(W, H);
  const RegField reg = uniform_reg(m, 0.05, 0.05);

  const SchwarzRun r = run_c3(1);
  const FlowState mono = monolithic(m, dt, reg, 3);
  const double dev = state_diff(r.flow, mono);
  const double bound = 1e-4 * state_max(mono);
  const double i2 = r.stats.increments[1], i10 = r.stats.increments[9];
  const bool ok = dev <= bound && i10 <= i2 / 10.0;
  report(3, ok, fmt("2x2/overlap-5 split tracks the monolithic solve "
                    "(dev %.2e vs %.2e, increment decay %.0fx)",
                    dev, bound, i10 > 0 ? i2 / i10 : INFINITY));
  return ok;
}

bool criterion4() {
  // 48x48 keeps every core strictly wider than twice the largest overlap
  const int W = 48, H = 48;
  const DataTerms dt = pattern_terms(W, H, 0.5, 0.2);
  const TriMesh m = build_pixel_mesh(W, H);
  double inc5[3];
  const int overlaps[3] = {1, 5, 10};
  for (int k = 0; k < 3; ++k) {
    RegField reg = uniform_reg(m, 0.2, 0.2);
    const Partition p = build_partition(W, H, 2, 2, overlaps[k]);
    SchwarzOptions opt;
    opt.n_iters = 5;
    opt.adapt.enabled = false;
    SchwarzStats stats;
    schwarz_solve(m, dt, reg, p, opt, &stats);
    inc5[k] = stats.increments[4];
  }
  const bool ok = inc5[2] <= inc5[1] && inc5[1] <= inc5[0];
  report(4, ok, fmt("iteration-5 increment shrinks with the overlap "
                    "(ov1 %.2e >= ov5 %.2e >= ov10 %.2e)",
                    inc5[0], inc5[1], inc5[2]));
  return ok;
}

bool criterion5() {
  const auto splits = enumerate_splits(48, 48, 12);
  auto ratio_of = [&](int px, int py) {
    for (const auto& s : splits)
      if (s.parts_x == px && s.parts_y == py) return s.ratio;
    return -1.0;
  };
  const bool ratios_ok = std::abs(ratio_of(1, 12) - 1.846) < 1e-3 &&
                         std::abs(ratio_of(2, 6) - 3.0) < 1e-3 &&
                         std::abs(ratio_of(3, 4) - 3.428) < 1e-3;
  const SplitChoice best = choose_split(48, 48, 12);
  const bool pick_ok = (best.parts_x == 3 && best.parts_y == 4) ||
                       (best.parts_x == 4 && best.parts_y == 3);
  const bool ok = ratios_ok && pick_ok;
  report(5, ok, fmt("split ratios 1.846 / 3.0 / 3.428 enumerated, %dx%d selected",
                    best.parts_x, best.parts_y));
  return ok;
}

bool criterion6() {
  const int W = 48, H = 48, sx = 19, sy = 19, ss = 10;
  const auto scene = fixtures::square_scene(W, H, sx, sy, ss);
  const DataTerms dt = fixtures::terms_from_frames(scene.frame0, scene.frame1, 1.0, 2.5);
  const TriMesh m = build_pixel_mesh(W, H);

  AdaptConfig cfg;
  cfg.kappa = 10.0;
  cfg.eta_threshold = 0.1;
  cfg.alpha_th = 0.002;
  RegField reg = uniform_reg(m, 0.2, 0.2);

  bool monotone = true, quiet_kept = true;
  for (int pass = 0; pass < 10; ++pass) {
    const FlowState u = monolithic(m, dt, reg, 3);
    const IndicatorField ind = error_indicator(m, dt, reg, u, 3);
    const RegField upd = update_alpha(reg, ind, cfg);
    for (int t = 0; t < m.n_triangles; ++t) {
      if (upd.alpha[t] > reg.alpha[t]) monotone = false;
      if (ind.eta[t] <= cfg.eta_threshold * ind.eta_max &&
          upd.alpha[t] != reg.alpha[t])
        quiet_kept = false;
    }
    reg = upd;
  }

  double amin = 1e300;
  double edge_sum = 0, rest_sum = 0;
  int edge_n = 0, rest_n = 0;
  for (int t = 0; t < m.n_triangles; ++t) {
    amin = std::min(amin, reg.alpha[t]);
    const int cell = t / 2, cx = cell % (W - 1), cy = cell / (W - 1);
    // cells within one pixel of the square outline at either frame
    const bool near = cx >= sx - 1 && cx <= sx + ss + 1 && cy >= sy - 1 && cy <= sy + ss + 1;
    const bool inside = cx > sx + 1 && cx < sx + ss - 2 && cy > sy + 1 && cy < sy + ss - 2;
    if (near && !inside) {
      edge_sum += reg.alpha[t];
      ++edge_n;
    } else {
      rest_sum += reg.alpha[t];
      ++rest_n;
    }
  }
  const double edge_mean = edge_sum / edge_n, rest_mean = rest_sum / rest_n;
  const bool floored = amin == cfg.alpha_th;
  const bool localized = edge_mean < rest_mean;
  const bool ok = monotone && quiet_kept && floored && localized;
  report(6, ok, fmt("adaptation: monotone %s, quiet elements kept %s, floor hit %s, "
                    "edge-band mean %.4f < elsewhere %.4f %s",
                    monotone ? "yes" : "NO", quiet_kept ? "yes" : "NO",
                    floored ? "yes" : "NO", edge_mean, rest_mean, localized ? "yes" : "NO"));
  return ok;
}

bool criterion7() {
  const int W = 48, H = 48, ss = 10;
  const GainSquare g = bounded_square_pair(W, H, (W - ss) / 2, (H - ss) / 2, ss, 1.2);
  double ee[2];
  for (int illum = 0; illum < 2; ++illum) {
    RunConfig cfg;
    cfg.alpha0 = 0.05;
    cfg.lambda0 = 5.0;  // a uniform gain costs the stiff third field nothing
    cfg.parts = 4;
    cfg.overlap = 5;
    cfg.schwarz_iters = 15;
    cfg.workers = 1;
    cfg.adapt = false;
    cfg.illumination = illum == 1;
    ee[illum] = compute_metrics(run_on_frames(g.f0, g.f1, cfg).flow, g.truth).ee;
  }
  const bool ok = ee[1] < ee[0] && ee[1] <= 0.5 * ee[0];
  report(7, ok, fmt("brightness-gain pair: EE %.4f with the illumination field, "
                    "%.4f without (ratio %.2f)",
                    ee[1], ee[0], ee[1] / ee[0]));
  return ok;
}

fs::path middlebury_dir() {
  if (const char* env = std::getenv("FLOWFEM_MIDDLEBURY_DIR")) return env;
  return "data/middlebury";
}

bool have_rubberwhale() {
  const fs::path d = middlebury_dir() / "RubberWhale";
  return fs::exists(d / "frame10.png") && fs::exists(d / "frame11.png") &&
         fs::exists(d / "flow10.flo");
}

RunResult run_rubberwhale(int workers) {
  const fs::path d = middlebury_dir() / "RubberWhale";
  RunConfig cfg;  // stock defaults, adaptation on
  cfg.frame0 = (d / "frame10.png").string();
  cfg.frame1 = (d / "frame11.png").string();
  cfg.ground_truth = (d / "flow10.flo").string();
  cfg.workers = workers;
  return run_pipeline(cfg);
}

int criterion8() {  // 1 pass, 0 fail, -1 skip
  if (!have_rubberwhale()) {
    report_skip(8, "RubberWhale end-to-end (dataset not present; set "
                   "FLOWFEM_MIDDLEBURY_DIR or place data/middlebury/RubberWhale)");
    return -1;
  }
  const auto t0 = Clock::now();
  const RunResult r = run_rubberwhale(4);
  const double el = seconds_since(t0);
  const bool ok = r.metrics && r.metrics->aae_deg <= 25.0 && r.metrics->ee <= 0.5 &&
                  el < 300.0;
  report(8, ok, fmt("RubberWhale: AAE %.2f deg (<= 25), EE %.3f (<= 0.5), %.0f s",
                    r.metrics ? r.metrics->aae_deg : -1.0,
                    r.metrics ? r.metrics->ee : -1.0, el));
  return ok ? 1 : 0;
}

bool criterion9() {
  const fs::path path = fs::temp_directory_path() / "acceptance_roundtrip.flo";
  std::mt19937 rng(4242);
  std::uniform_real_distribution<float> d(-50.0f, 50.0f);
  bool ok = true;
  for (int k = 0; k < 100 && ok; ++k) {
    FloField f(3 + k % 13, 2 + k % 11);
    for (auto& x : f.u) x = d(rng);
    for (auto& x : f.v) x = d(rng);
    if (k % 7 == 0) f.u[0] = 1.5e9f;  // unknown-flow marker
    write_flo(path.string(), f);
    const FloField g = read_flo(path.string());
    ok = g.width == f.width && g.height == f.height &&
         std::memcmp(g.u.data(), f.u.data(), f.u.size() * 4) == 0 &&
         std::memcmp(g.v.data(), f.v.data(), f.v.size() * 4) == 0;
  }
  fs::remove(path);
  report(9, ok, "100 random .flo fields round trip bitwise");
  return ok;
}

int criterion10() {
  const SchwarzRun one = run_c3(1);
  const SchwarzRun four = run_c3(4);
  const bool c3_ok = state_bits(one.flow, four.flow);

  bool rw_ok = true;
  bool rw_ran = false;
  if (have_rubberwhale()) {
    rw_ran = true;
    const RunResult a = run_rubberwhale(1);
    const RunResult b = run_rubberwhale(4);
    rw_ok = state_bits(a.flow, b.flow);
  }
  const bool ok = c3_ok && rw_ok;
  std::string detail = fmt("worker counts 1 and 4 give bitwise-identical flow "
                           "(consistency run %s",
                           c3_ok ? "identical" : "DIFFERS");
  detail += rw_ran ? fmt(", RubberWhale %s)", rw_ok ? "identical" : "DIFFERS")
                   : ", RubberWhale part skipped: dataset not present)";
  report(10, ok, detail);
  return ok ? 1 : 0;
}

bool criterion11() {
  const int W = 512, H = 512;
  const Image f0 = fixtures::pattern_frame(W, H);
  const Image f1 = fixtures::pattern_frame(W, H, 0.6, 0.3);

  // stock configuration on both sides; only the split and worker count move
  auto timed = [&](int parts, int workers) {
    RunConfig cfg;
    cfg.parts = parts;
    cfg.workers = workers;
    const auto t0 = Clock::now();
    run_on_frames(f0, f1, cfg);
    return seconds_since(t0);
  };
  const double t44 = timed(4, 4);
  const double t11 = timed(1, 1);
  const bool ok = t44 < t11;
  report(11, ok, fmt("512x512: 4 parts / 4 workers %.1f s vs 1 part / 1 worker %.1f s",
                     t44, t11));
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> want;
  for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
  auto enabled = [&](int id) { return want.empty() || want.count(id) > 0; };

  int fails = 0, skips = 0, passes = 0;
  auto tally = [&](int r) {
    if (r < 0)
      ++skips;
    else if (r == 0)
      ++fails;
    else
      ++passes;
  };

  if (enabled(1)) tally(criterion1());
  if (enabled(2)) tally(criterion2());
  if (enabled(3)) tally(criterion3());
  if (enabled(4)) tally(criterion4());
  if (enabled(5)) tally(criterion5());
  if (enabled(6)) tally(criterion6());
  if (enabled(7)) tally(criterion7());
  if (enabled(8)) tally(criterion8());
  if (enabled(9)) tally(criterion9());
  if (enabled(10)) tally(criterion10());
  if (enabled(11)) tally(criterion11());

  std::printf("%d passed, %d failed, %d skipped\n", passes, fails, skips);
  return fails;
}

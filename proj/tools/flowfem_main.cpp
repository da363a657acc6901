#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "flowfem/pipeline.hpp"

using namespace flowfem;

int main(int argc, char** argv) {
  CLI::App app{"Dense optical flow under varying illumination\n"
               "(adaptive FEM with overlapping Schwarz decomposition)"};
  app.set_config("--config", "", "Read options from a key=value file");

  RunConfig cfg;
  std::string illum = "on", adapt = "on";
  std::string fixture_out;
  double fixture_gain = 1.2;
  bool ablation = false;

  app.add_option("--frame0", cfg.frame0, "First frame (PGM or PNG)");
  app.add_option("--frame1", cfg.frame1, "Second frame (PGM or PNG)");
  app.add_option("--sigma", cfg.sigma, "Pre-smoothing std dev")->capture_default_str();
  app.add_option("--rho", cfg.rho, "Data-term smoothing std dev")->capture_default_str();
  app.add_option("--alpha", cfg.alpha0, "Initial flow regularization")->capture_default_str();
  app.add_option("--lambda", cfg.lambda0, "Illumination regularization")->capture_default_str();
  app.add_option("--illumination", illum, "Illumination term: on|off")->capture_default_str();
  app.add_option("--parts", cfg.parts, "Number of subdomains")->capture_default_str();
  app.add_option("--overlap", cfg.overlap, "Subdomain overlap in pixels")->capture_default_str();
  app.add_option("--schwarz-iters", cfg.schwarz_iters, "Schwarz iterations")->capture_default_str();
  app.add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
  app.add_option("--adapt", adapt, "Adaptive regularization: on|off")->capture_default_str();
  app.add_option("--kappa", cfg.kappa, "Adaptation strength")->capture_default_str();
  app.add_option("--eta-threshold", cfg.eta_threshold,
                 "Indicator fraction below which alpha is kept")->capture_default_str();
  double alpha_th = -1.0;
  app.add_option("--alpha-th", alpha_th, "Alpha lower bound (default alpha/100)");
  app.add_option("--adapt-iters", cfg.adapt_iters, "Iterations that adapt alpha")->capture_default_str();
  app.add_option("--solver", cfg.solver, "auto|cholesky|cg")->capture_default_str();
  app.add_option("--cg-tol", cfg.cg_tolerance, "CG relative tolerance")->capture_default_str();
  app.add_option("--ground-truth", cfg.ground_truth, "Ground-truth .flo file");
  app.add_option("--out-flo", cfg.out_flo, "Write the flow as .flo");
  app.add_option("--out-png", cfg.out_png, "Write the color-coded flow as PNG");
  app.add_option("--out-metrics", cfg.out_metrics, "Write AAE/EE as CSV");
  app.add_option("--out-increments", cfg.out_increments, "Write per-iteration increments as CSV");
  app.add_option("--dump-alpha", cfg.dump_alpha, "Write the final alpha field as PGM");
  app.add_option("--dump-mt", cfg.dump_mt, "Write the illumination-rate field as PNG");
  app.add_flag("--ablation", ablation,
               "Run with the illumination term on and off and compare errors");
  app.add_option("--make-illum-fixture", fixture_out,
                 "Write a brightness-scaled copy of --frame0 and exit");
  app.add_option("--gain", fixture_gain, "Brightness gain for the fixture")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    auto parse_onoff = [](const std::string& v, const char* what) {
      if (v == "on") return true;
      if (v == "off") return false;
      throw std::runtime_error(std::string("cli.") + what + ": expected on|off, got '" + v + "'");
    };
    cfg.illumination = parse_onoff(illum, "illumination");
    cfg.adapt = parse_onoff(adapt, "adapt");
    if (alpha_th >= 0.0) cfg.alpha_th = alpha_th;

    if (!fixture_out.empty()) {
      if (cfg.frame0.empty())
        throw std::runtime_error("cli.make_illum_fixture: --frame0 is required");
      const Image img = scale_brightness(load_image(cfg.frame0), fixture_gain);
      if (fixture_out.size() > 4 && fixture_out.substr(fixture_out.size() - 4) == ".png") {
        RgbImage rgb(img.width, img.height);
        for (int y = 0; y < img.height; ++y)
          for (int x = 0; x < img.width; ++x) {
            const auto v = static_cast<uint8_t>(
                std::clamp(img.at(x, y), 0.0, 1.0) * 255.0 + 0.5);
            rgb.px(x, y)[0] = rgb.px(x, y)[1] = rgb.px(x, y)[2] = v;
          }
        save_png_rgb(fixture_out, rgb);
      } else {
        save_pgm(fixture_out, img);
      }
      std::cout << "wrote " << fixture_out << " (gain " << fixture_gain << ")\n";
      return 0;
    }

    if (ablation) {
      if (cfg.ground_truth.empty())
        throw std::runtime_error("cli.ablation: --ground-truth is required");
      RunConfig on = cfg, off = cfg;
      on.illumination = true;
      off.illumination = false;
      const std::string metrics_path = cfg.out_metrics;
      on.out_metrics.clear();
      off.out_metrics.clear();
      off.out_flo.clear(); off.out_png.clear(); off.out_increments.clear();
      off.dump_alpha.clear(); off.dump_mt.clear();
      const RunResult ron = run_pipeline(on);
      const RunResult roff = run_pipeline(off);
      std::printf("illumination on : AAE %.4f deg, EE %.4f px (%ld pixels)\n",
                  ron.metrics->aae_deg, ron.metrics->ee, ron.metrics->valid);
      std::printf("illumination off: AAE %.4f deg, EE %.4f px (%ld pixels)\n",
                  roff.metrics->aae_deg, roff.metrics->ee, roff.metrics->valid);
      if (!metrics_path.empty()) {
        std::ofstream out(metrics_path);
        if (!out) throw std::runtime_error("cli.out_metrics: cannot open " + metrics_path);
        out << "mode,aae_deg,ee,valid_pixels\n";
        out << "illum_on," << ron.metrics->aae_deg << "," << ron.metrics->ee << ","
            << ron.metrics->valid << "\n";
        out << "illum_off," << roff.metrics->aae_deg << "," << roff.metrics->ee << ","
            << roff.metrics->valid << "\n";
      }
      return 0;
    }

    const RunResult res = run_pipeline(cfg);
    double secs = 0.0;
    for (double s : res.stats.seconds) secs += s;
    std::printf("flow %dx%d: %zu Schwarz iterations, final increment %.3e, %.2f s\n",
                res.width, res.height, res.stats.increments.size(),
                res.stats.increments.empty() ? 0.0 : res.stats.increments.back(), secs);
    if (res.metrics)
      std::printf("metrics: AAE %.4f deg, EE %.4f px (%ld pixels)\n",
                  res.metrics->aae_deg, res.metrics->ee, res.metrics->valid);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

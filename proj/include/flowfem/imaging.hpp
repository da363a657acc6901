#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flowfem {

/// Grayscale image, row-major, intensities in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, 0.0) {}

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return data.size(); }
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // 3 bytes per pixel, row-major

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {}

  uint8_t* px(int x, int y) { return &data[(static_cast<size_t>(y) * width + x) * 3]; }
  const uint8_t* px(int x, int y) const { return &data[(static_cast<size_t>(y) * width + x) * 3]; }
};

/// Loads an 8/16-bit PGM (P5) or PNG file; color PNG is reduced to luminance.
Image load_image(const std::string& path);

/// Writes an 8-bit binary PGM; values are clamped to [0,1] before quantization.
void save_pgm(const std::string& path, const Image& img);

void save_png_rgb(const std::string& path, const RgbImage& img);

/// Gaussian smoothing with kernel radius ceil(3*sigma), renormalized tail,
/// symmetric boundary reflection. sigma <= 0 returns the input unchanged.
Image gaussian_smooth(const Image& img, double sigma);

/// Spatial and temporal derivative fields on the pixel grid.
struct DerivativeField {
  int width = 0;
  int height = 0;
  std::vector<double> fx, fy, ft, f;
};

/// Central differences of the frame average (one-sided at borders),
/// ft = f1 - f0, f = f0. Frames are expected pre-smoothed.
DerivativeField compute_derivatives(const Image& f0, const Image& f1);

/// Per-pixel data-term tensor: rho-smoothed products of derivatives.
/// a* are the entries of the symmetric 3x3 matrix coupling (u1, u2, mt),
/// f1..f3 the right-hand side, c the constant term K_rho * ft^2.
struct DataTerms {
  int width = 0;
  int height = 0;
  std::vector<double> a11, a12, a13, a22, a23, a33;
  std::vector<double> f1, f2, f3;
  std::vector<double> c;
};

DataTerms build_data_terms(const DerivativeField& d, double rho);

}  // namespace flowfem

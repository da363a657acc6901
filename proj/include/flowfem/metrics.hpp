#pragma once

#include <string>
#include <vector>

#include "flowfem/assembly.hpp"
#include "flowfem/imaging.hpp"

namespace flowfem {

/// Two-component flow field in float32, as stored in .flo files.
/// Components with magnitude > 1e9 mark invalid ground-truth pixels.
struct FloField {
  int width = 0;
  int height = 0;
  std::vector<float> u, v;

  FloField() = default;
  FloField(int w, int h)
      : width(w), height(h),
        u(static_cast<size_t>(w) * h, 0.0f),
        v(static_cast<size_t>(w) * h, 0.0f) {}
};

constexpr float kFloMagic = 202021.25f;
constexpr double kFloValidLimit = 1e9;

FloField read_flo(const std::string& path);
void write_flo(const std::string& path, const FloField& f);

FloField to_flo(const FlowState& state);

struct FlowMetrics {
  double aae_deg = 0.0;  // average angular error, degrees
  double ee = 0.0;       // average endpoint error, pixels
  long valid = 0;        // pixels that entered the averages
};

/// Averages over pixels with valid ground truth; angular error uses the
/// (u, v, 1) spatio-temporal normalization.
FlowMetrics compute_metrics(const FlowState& flow, const FloField& truth);

/// Middlebury-style color coding; max_magnitude <= 0 normalizes by the
/// 99th percentile of the flow magnitude.
RgbImage colorize_flow(const FlowState& flow, double max_magnitude = 0.0);

/// Signed diverging map (blue negative, white zero, red positive),
/// normalized by max |value|.
RgbImage colorize_signed(const std::vector<double>& field, int width, int height);

/// Grayscale map of per-triangle values averaged onto vertices, normalized
/// to the value range.
Image rasterize_triangle_field(const TriMesh& m, const std::vector<double>& tri_values);

}  // namespace flowfem

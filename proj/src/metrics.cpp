#include "flowfem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace flowfem {

namespace {

[[noreturn]] void fail(const std::string& op, const std::string& msg) {
  throw std::runtime_error("metrics." + op + ": " + msg);
}

inline bool valid_gt(float u, float v) {
  return std::abs(u) <= kFloValidLimit && std::abs(v) <= kFloValidLimit;
}

}  // namespace

FloField read_flo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("read_flo", "cannot open " + path);
  float magic = 0.0f;
  int32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || magic != kFloMagic) fail("read_flo", "bad magic in " + path);
  if (w <= 0 || h <= 0 || w > 100000 || h > 100000)
    fail("read_flo", "implausible dimensions in " + path);
  FloField f(w, h);
  std::vector<float> row(static_cast<size_t>(w) * 2);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * 4);
    if (!in) fail("read_flo", "truncated data in " + path);
    for (int x = 0; x < w; ++x) {
      f.u[static_cast<size_t>(y) * w + x] = row[2 * x];
      f.v[static_cast<size_t>(y) * w + x] = row[2 * x + 1];
    }
  }
  return f;
}

void write_flo(const std::string& path, const FloField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("write_flo", "cannot open " + path);
  const float magic = kFloMagic;
  const int32_t w = f.width, h = f.height;
  out.write(reinterpret_cast<const char*>(&magic), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  std::vector<float> row(static_cast<size_t>(w) * 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      row[2 * x] = f.u[static_cast<size_t>(y) * w + x];
      row[2 * x + 1] = f.v[static_cast<size_t>(y) * w + x];
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size() * 4);
  }
  if (!out) fail("write_flo", "write failed for " + path);
}

FloField to_flo(const FlowState& state) {
  FloField f(state.width, state.height);
  for (size_t i = 0; i < state.u1.size(); ++i) {
    f.u[i] = static_cast<float>(state.u1[i]);
    f.v[i] = static_cast<float>(state.u2[i]);
  }
  return f;
}

FlowMetrics compute_metrics(const FlowState& flow, const FloField& truth) {
  if (flow.width != truth.width || flow.height != truth.height)
    fail("compute_metrics", "flow and ground truth sizes differ");
  FlowMetrics m;
  double sum_ang = 0.0, sum_ee = 0.0;
  const size_t n = truth.u.size();
  for (size_t i = 0; i < n; ++i) {
    const float ue = truth.u[i], ve = truth.v[i];
    if (!valid_gt(ue, ve)) continue;
    const double u = flow.u1[i], v = flow.u2[i];
    const double num = u * ue + v * ve + 1.0;
    const double den = std::sqrt((u * u + v * v + 1.0) *
                                 (double(ue) * ue + double(ve) * ve + 1.0));
    double c = num / den;
    c = std::min(1.0, std::max(-1.0, c));
    sum_ang += std::acos(c);
    const double du = u - ue, dv = v - ve;
    sum_ee += std::sqrt(du * du + dv * dv);
    ++m.valid;
  }
  if (m.valid > 0) {
    m.aae_deg = sum_ang / m.valid * 180.0 / M_PI;
    m.ee = sum_ee / m.valid;
  }
  return m;
}

namespace {

// 55-entry color wheel: RY 15, YG 6, GC 4, CB 11, BM 13, MR 6
struct Wheel {
  static constexpr int ncols = 55;
  double col[ncols][3];
  Wheel() {
    const int seg[6] = {15, 6, 4, 11, 13, 6};
    int k = 0;
    auto put = [&](double r, double g, double b) {
      col[k][0] = r; col[k][1] = g; col[k][2] = b; ++k;
    };
    for (int i = 0; i < seg[0]; ++i) put(255, 255.0 * i / seg[0], 0);
    for (int i = 0; i < seg[1]; ++i) put(255 - 255.0 * i / seg[1], 255, 0);
    for (int i = 0; i < seg[2]; ++i) put(0, 255, 255.0 * i / seg[2]);
    for (int i = 0; i < seg[3]; ++i) put(0, 255 - 255.0 * i / seg[3], 255);
    for (int i = 0; i < seg[4]; ++i) put(255.0 * i / seg[4], 0, 255);
    for (int i = 0; i < seg[5]; ++i) put(255, 0, 255 - 255.0 * i / seg[5]);
  }
};

}  // namespace

RgbImage colorize_flow(const FlowState& flow, double max_magnitude) {
  static const Wheel wheel;
  const int W = flow.width, H = flow.height;
  const size_t n = static_cast<size_t>(W) * H;

  double maxrad = max_magnitude;
  if (maxrad <= 0.0) {
    std::vector<double> mags(n);
    for (size_t i = 0; i < n; ++i)
      mags[i] = std::hypot(flow.u1[i], flow.u2[i]);
    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    maxrad = sorted[static_cast<size_t>(0.99 * (n - 1))];
  }
  if (maxrad <= 0.0) maxrad = 1.0;

  RgbImage img(W, H);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const size_t i = static_cast<size_t>(y) * W + x;
      const double u = flow.u1[i] / maxrad, v = flow.u2[i] / maxrad;
      const double rad = std::hypot(u, v);
      double a = std::atan2(v, u) / (2.0 * M_PI);  // [-0.5, 0.5]
      if (a < 0.0) a += 1.0;
      const double fk = a * Wheel::ncols;
      const int k0 = std::min(static_cast<int>(fk), Wheel::ncols - 1);
      const int k1 = (k0 + 1) % Wheel::ncols;
      const double f = fk - k0;
      uint8_t* px = img.px(x, y);
      for (int c = 0; c < 3; ++c) {
        double col = ((1.0 - f) * wheel.col[k0][c] + f * wheel.col[k1][c]) / 255.0;
        if (rad <= 1.0)
          col = 1.0 - rad * (1.0 - col);  // desaturate toward white at zero flow
        else
          col *= 0.75;
        px[c] = static_cast<uint8_t>(255.0 * col + 0.5);
      }
    }
  }
  return img;
}

RgbImage colorize_signed(const std::vector<double>& field, int width, int height) {
  double amax = 0.0;
  for (double v : field) amax = std::max(amax, std::abs(v));
  if (amax <= 0.0) amax = 1.0;
  RgbImage img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double v = field[static_cast<size_t>(y) * width + x] / amax;
      const double t = std::min(1.0, std::abs(v));
      uint8_t* px = img.px(x, y);
      if (v >= 0.0) {  // white -> red
        px[0] = 255;
        px[1] = px[2] = static_cast<uint8_t>(255.0 * (1.0 - t) + 0.5);
      } else {  // white -> blue
        px[2] = 255;
        px[0] = px[1] = static_cast<uint8_t>(255.0 * (1.0 - t) + 0.5);
      }
    }
  return img;
}

Image rasterize_triangle_field(const TriMesh& m, const std::vector<double>& tri_values) {
  if (static_cast<int>(tri_values.size()) != m.n_triangles)
    fail("rasterize_triangle_field", "value count does not match the mesh");
  Image img(m.width, m.height);
  std::vector<double> acc(m.n_vertices, 0.0);
  for (int v = 0; v < m.n_vertices; ++v) {
    double s = 0.0;
    const int lo = m.v2t_ptr[v], hi = m.v2t_ptr[v + 1];
    for (int p = lo; p < hi; ++p) s += tri_values[m.v2t[p]];
    acc[v] = hi > lo ? s / (hi - lo) : 0.0;
  }
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  const double span = *hi - *lo;
  for (int v = 0; v < m.n_vertices; ++v)
    img.data[v] = span > 0.0 ? (acc[v] - *lo) / span : 0.5;
  return img;
}

}  // namespace flowfem

#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "flowfem/assembly.hpp"
#include "flowfem/imaging.hpp"

namespace fixtures {

using flowfem::DataTerms;
using flowfem::DerivativeField;
using flowfem::FlowState;
using flowfem::Image;

// smooth, well-textured analytic pattern; translate() samples it shifted so a
// pair of frames has exact ground-truth motion
inline double pattern(double x, double y) {
  double v = 0.45 + 0.25 * std::sin(2.0 * M_PI * x / 7.3 + 1.1) * std::cos(2.0 * M_PI * y / 9.7) +
             0.15 * std::sin(2.0 * M_PI * (x + y) / 13.1);
  return std::clamp(v, 0.0, 1.0);
}

inline Image pattern_frame(int w, int h, double shift_x = 0.0, double shift_y = 0.0) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = pattern(x - shift_x, y - shift_y);
  return img;
}

// second texture for the moving-square fixture
inline double pattern2(double x, double y) {
  double v = 0.5 + 0.3 * std::sin(2.0 * M_PI * x / 4.9) * std::sin(2.0 * M_PI * y / 5.7) +
             0.1 * std::cos(2.0 * M_PI * (x - y) / 8.3);
  return std::clamp(v, 0.0, 1.0);
}

// textured square moving one pixel right over a static textured background
struct SquareScene {
  Image frame0, frame1;
  int x0, y0, x1, y1;  // square at frame0, half-open
};

inline SquareScene square_scene(int w, int h, int sq_x, int sq_y, int sq_size) {
  SquareScene s{pattern_frame(w, h), pattern_frame(w, h), sq_x, sq_y,
                sq_x + sq_size, sq_y + sq_size};
  for (int y = sq_y; y < sq_y + sq_size; ++y)
    for (int x = sq_x; x < sq_x + sq_size; ++x) {
      s.frame0.at(x, y) = pattern2(x - sq_x, y - sq_y);
      s.frame1.at(x + 1, y) = pattern2(x - sq_x, y - sq_y);
    }
  return s;
}

inline Image random_image(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Image img(w, h);
  for (auto& v : img.data) v = dist(rng);
  return img;
}

inline FlowState random_state(int w, int h, unsigned seed, double amp = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-amp, amp);
  FlowState s(w, h);
  for (auto& v : s.u1) v = dist(rng);
  for (auto& v : s.u2) v = dist(rng);
  for (auto& v : s.mt) v = dist(rng);
  return s;
}

inline DataTerms terms_from_frames(const Image& f0, const Image& f1, double sigma,
                                   double rho) {
  using namespace flowfem;
  const Image s0 = gaussian_smooth(f0, sigma);
  const Image s1 = gaussian_smooth(f1, sigma);
  return build_data_terms(compute_derivatives(s0, s1), rho);
}

inline DataTerms random_terms(int w, int h, unsigned seed, double sigma = 1.0,
                              double rho = 1.5) {
  return terms_from_frames(random_image(w, h, seed), random_image(w, h, seed + 1000),
                           sigma, rho);
}

inline double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace fixtures

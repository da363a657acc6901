#include "flowfem/imaging.hpp"

#include <cmath>
#include <stdexcept>

namespace flowfem {

namespace {

// symmetric (edge-repeating) reflection: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline int fold(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

std::vector<double> gauss_kernel(double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(2 * r + 1);
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    w[k + r] = std::exp(-0.5 * (k * k) / (sigma * sigma));
    sum += w[k + r];
  }
  for (auto& x : w) x /= sum;
  return w;
}

}  // namespace

Image gaussian_smooth(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const auto w = gauss_kernel(sigma);
  const int r = (static_cast<int>(w.size()) - 1) / 2;
  const int W = img.width, H = img.height;

  Image tmp(W, H);
#pragma omp parallel for
  for (int y = 0; y < H; ++y) {
    const double* row = &img.data[static_cast<size_t>(y) * W];
    double* out = &tmp.data[static_cast<size_t>(y) * W];
    for (int x = 0; x < W; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k) s += w[k + r] * row[fold(x + k, W)];
      out[x] = s;
    }
  }

  Image res(W, H);
#pragma omp parallel for
  for (int y = 0; y < H; ++y) {
    double* out = &res.data[static_cast<size_t>(y) * W];
    for (int x = 0; x < W; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k)
        s += w[k + r] * tmp.data[static_cast<size_t>(fold(y + k, H)) * W + x];
      out[x] = s;
    }
  }
  return res;
}

DerivativeField compute_derivatives(const Image& f0, const Image& f1) {
  if (f0.width != f1.width || f0.height != f1.height)
    throw std::runtime_error("imaging.compute_derivatives: frame sizes differ");
  const int W = f0.width, H = f0.height;
  if (W < 2 || H < 2)
    throw std::runtime_error("imaging.compute_derivatives: frames must be at least 2x2");

  DerivativeField d;
  d.width = W;
  d.height = H;
  const size_t n = static_cast<size_t>(W) * H;
  d.fx.resize(n);
  d.fy.resize(n);
  d.ft.resize(n);
  d.f.resize(n);

#pragma omp parallel for
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const size_t i = static_cast<size_t>(y) * W + x;
      auto favg = [&](int xx, int yy) {
        const size_t j = static_cast<size_t>(yy) * W + xx;
        return 0.5 * (f0.data[j] + f1.data[j]);
      };
      if (x == 0)
        d.fx[i] = favg(1, y) - favg(0, y);
      else if (x == W - 1)
        d.fx[i] = favg(W - 1, y) - favg(W - 2, y);
      else
        d.fx[i] = 0.5 * (favg(x + 1, y) - favg(x - 1, y));
      if (y == 0)
        d.fy[i] = favg(x, 1) - favg(x, 0);
      else if (y == H - 1)
        d.fy[i] = favg(x, H - 1) - favg(x, H - 2);
      else
        d.fy[i] = 0.5 * (favg(x, y + 1) - favg(x, y - 1));
      d.ft[i] = f1.data[i] - f0.data[i];
      d.f[i] = f0.data[i];
    }
  }
  return d;
}

DataTerms build_data_terms(const DerivativeField& d, double rho) {
  const int W = d.width, H = d.height;
  const size_t n = static_cast<size_t>(W) * H;

  auto smooth_product = [&](auto&& f) {
    Image p(W, H);
#pragma omp parallel for
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const size_t i = static_cast<size_t>(y) * W + x;
        p.data[i] = f(i);
      }
    return gaussian_smooth(p, rho).data;
  };

  DataTerms t;
  t.width = W;
  t.height = H;
  t.a11 = smooth_product([&](size_t i) { return d.fx[i] * d.fx[i]; });
  t.a12 = smooth_product([&](size_t i) { return d.fx[i] * d.fy[i]; });
  t.a13 = smooth_product([&](size_t i) { return -d.fx[i] * d.f[i]; });
  t.a22 = smooth_product([&](size_t i) { return d.fy[i] * d.fy[i]; });
  t.a23 = smooth_product([&](size_t i) { return -d.fy[i] * d.f[i]; });
  t.a33 = smooth_product([&](size_t i) { return d.f[i] * d.f[i]; });
  t.f1 = smooth_product([&](size_t i) { return -d.fx[i] * d.ft[i]; });
  t.f2 = smooth_product([&](size_t i) { return -d.fy[i] * d.ft[i]; });
  t.f3 = smooth_product([&](size_t i) { return d.f[i] * d.ft[i]; });
  t.c = smooth_product([&](size_t i) { return d.ft[i] * d.ft[i]; });
  (void)n;
  return t;
}

}  // namespace flowfem

#pragma once

// Full-reference similarity kernels on normalized [0, 1] tensors: MAE, MSE,
// PSNR and windowed SSIM, each with the gradient needed for training.

#include <array>
#include <cmath>
#include <vector>

#include "hullsight/tensor.hpp"

namespace hullsight::similarity {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr double kPsnrSaturationDb = 100.0;

// Normalized 1-D Gaussian; the 2-D window is its outer product.
inline std::array<double, kSsimWindow> gaussian_window() {
  std::array<double, kSsimWindow> g{};
  double sum = 0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    g[i] = std::exp(-d * d / (2 * kSsimSigma * kSsimSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

template <typename S>
S mean_abs_error(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a.shape(), b.shape(), "mean_abs_error operands");
  if (a.empty()) throw ValueError("mean_abs_error of empty tensors");
  return (a.array() - b.array()).abs().mean();
}

// d/da of mean|a - b| scaled by `g`; d/db is its negation. sign(0) = 0.
template <typename S>
Tensor<S> mean_abs_error_grad(const Tensor<S>& a, const Tensor<S>& b, S g) {
  const S scale = g / S(a.size());
  return Tensor<S>(a.shape(), (a.array() - b.array()).sign() * scale);
}

template <typename S>
S mean_squared_error(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a.shape(), b.shape(), "mean_squared_error operands");
  if (a.empty()) throw ValueError("mean_squared_error of empty tensors");
  return (a.array() - b.array()).square().mean();
}

// 10*log10(1/mse) with peak 1, saturated at 100 dB (mse == 0 included).
template <typename S>
S psnr_from_mse(S mse) {
  if (mse <= S(0)) return S(kPsnrSaturationDb);
  const S db = S(10) * std::log10(S(1) / mse);
  return db > S(kPsnrSaturationDb) ? S(kPsnrSaturationDb) : db;
}

// d psnr / d mse; zero in the saturated region.
template <typename S>
S psnr_mse_derivative(S mse) {
  if (mse <= S(0) || S(10) * std::log10(S(1) / mse) >= S(kPsnrSaturationDb)) return S(0);
  return S(-10) / (S(std::log(10.0)) * mse);
}

namespace detail {

// Valid-mode separable Gaussian filter of an h x w plane.
template <typename S>
void filter_valid(const S* src, Index h, Index w, const std::array<double, kSsimWindow>& g, std::vector<S>& tmp,
                  S* dst) {
  const Index ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  tmp.assign(static_cast<std::size_t>(h * ow), S(0));
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < ow; ++x) {
      S acc = 0;
      for (int j = 0; j < kSsimWindow; ++j) acc += S(g[j]) * src[y * w + x + j];
      tmp[y * ow + x] = acc;
    }
  for (Index y = 0; y < oh; ++y)
    for (Index x = 0; x < ow; ++x) {
      S acc = 0;
      for (int i = 0; i < kSsimWindow; ++i) acc += S(g[i]) * tmp[(y + i) * ow + x];
      dst[y * ow + x] = acc;
    }
}

// Adjoint of filter_valid: scatters an (h-10) x (w-10) map back to h x w.
template <typename S>
void filter_valid_adjoint(const S* src, Index h, Index w, const std::array<double, kSsimWindow>& g,
                          std::vector<S>& tmp, S* dst) {
  const Index ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  tmp.assign(static_cast<std::size_t>(h * ow), S(0));
  for (Index y = 0; y < oh; ++y)
    for (Index x = 0; x < ow; ++x)
      for (int i = 0; i < kSsimWindow; ++i) tmp[(y + i) * ow + x] += S(g[i]) * src[y * ow + x];
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) dst[y * w + x] = 0;
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < ow; ++x)
      for (int j = 0; j < kSsimWindow; ++j) dst[y * w + x + j] += S(g[j]) * tmp[y * ow + x];
}

template <typename S>
struct PlaneMoments {
  std::vector<S> mx, my, exx, eyy, exy;
};

template <typename S>
PlaneMoments<S> plane_moments(const S* x, const S* y, Index h, Index w, const std::array<double, kSsimWindow>& g) {
  const Index n = (h - kSsimWindow + 1) * (w - kSsimWindow + 1);
  const Index size = h * w;
  PlaneMoments<S> m;
  for (auto* v : {&m.mx, &m.my, &m.exx, &m.eyy, &m.exy}) v->resize(static_cast<std::size_t>(n));
  std::vector<S> tmp, xx(size), yy(size), xy(size);
  for (Index i = 0; i < size; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  filter_valid(x, h, w, g, tmp, m.mx.data());
  filter_valid(y, h, w, g, tmp, m.my.data());
  filter_valid(xx.data(), h, w, g, tmp, m.exx.data());
  filter_valid(yy.data(), h, w, g, tmp, m.eyy.data());
  filter_valid(xy.data(), h, w, g, tmp, m.exy.data());
  return m;
}

}  // namespace detail

inline void require_ssim_extent(const Shape& s) {
  if (s.h < kSsimWindow || s.w < kSsimWindow) {
    throw ShapeError({}, {s.n, s.c, kSsimWindow, kSsimWindow}, s, "ssim needs H, W >= 11 (window size)");
  }
}

// Mean SSIM over every valid window position of every (n, c) plane.
template <typename S>
S ssim(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a.shape(), b.shape(), "ssim operands");
  require_ssim_extent(a.shape());
  const auto g = gaussian_window();
  const S c1 = S(kSsimC1), c2 = S(kSsimC2);
  S total = 0;
  Index count = 0;
  for (Index n = 0; n < a.n(); ++n)
    for (Index c = 0; c < a.c(); ++c) {
      const auto m = detail::plane_moments(a.plane(n, c), b.plane(n, c), a.h(), a.w(), g);
      for (std::size_t p = 0; p < m.mx.size(); ++p) {
        const S vx = m.exx[p] - m.mx[p] * m.mx[p];
        const S vy = m.eyy[p] - m.my[p] * m.my[p];
        const S cxy = m.exy[p] - m.mx[p] * m.my[p];
        total += ((S(2) * m.mx[p] * m.my[p] + c1) * (S(2) * cxy + c2)) /
                 ((m.mx[p] * m.mx[p] + m.my[p] * m.my[p] + c1) * (vx + vy + c2));
      }
      count += static_cast<Index>(m.mx.size());
    }
  return total / S(count);
}

template <typename S>
struct PairGrad {
  Tensor<S> a;
  Tensor<S> b;
};

// Gradient of g * ssim(a, b) with respect to both operands.
template <typename S>
PairGrad<S> ssim_grad(const Tensor<S>& a, const Tensor<S>& b, S g_out) {
  require_same_shape(a.shape(), b.shape(), "ssim operands");
  require_ssim_extent(a.shape());
  const auto g = gaussian_window();
  const S c1 = S(kSsimC1), c2 = S(kSsimC2);
  const Index h = a.h(), w = a.w();
  const Index valid = (h - kSsimWindow + 1) * (w - kSsimWindow + 1);
  const S scale = g_out / S(valid * a.n() * a.c());
  PairGrad<S> out{Tensor<S>(a.shape()), Tensor<S>(b.shape())};
  std::vector<S> gmx(valid), gmy(valid), gexx(valid), geyy(valid), gexy(valid), tmp;
  std::vector<S> tmx(h * w), tmy(h * w), texx(h * w), teyy(h * w), texy(h * w);
  for (Index n = 0; n < a.n(); ++n)
    for (Index c = 0; c < a.c(); ++c) {
      const S* x = a.plane(n, c);
      const S* y = b.plane(n, c);
      const auto m = detail::plane_moments(x, y, h, w, g);
      for (Index p = 0; p < valid; ++p) {
        const S mx = m.mx[p], my = m.my[p];
        const S vx = m.exx[p] - mx * mx, vy = m.eyy[p] - my * my, cxy = m.exy[p] - mx * my;
        const S a1 = S(2) * mx * my + c1, a2 = S(2) * cxy + c2;
        const S b1 = mx * mx + my * my + c1, b2 = vx + vy + c2;
        const S s = (a1 * a2) / (b1 * b2);
        const S ds_dmx = S(2) * my * a2 / (b1 * b2) - S(2) * mx * s / b1;
        const S ds_dmy = S(2) * mx * a2 / (b1 * b2) - S(2) * my * s / b1;
        const S ds_dv = -s / b2;
        const S ds_dc = S(2) * a1 / (b1 * b2);
        gmx[p] = scale * (ds_dmx - S(2) * mx * ds_dv - my * ds_dc);
        gmy[p] = scale * (ds_dmy - S(2) * my * ds_dv - mx * ds_dc);
        gexx[p] = scale * ds_dv;
        geyy[p] = scale * ds_dv;
        gexy[p] = scale * ds_dc;
      }
      detail::filter_valid_adjoint(gmx.data(), h, w, g, tmp, tmx.data());
      detail::filter_valid_adjoint(gmy.data(), h, w, g, tmp, tmy.data());
      detail::filter_valid_adjoint(gexx.data(), h, w, g, tmp, texx.data());
      detail::filter_valid_adjoint(geyy.data(), h, w, g, tmp, teyy.data());
      detail::filter_valid_adjoint(gexy.data(), h, w, g, tmp, texy.data());
      S* ga = out.a.plane(n, c);
      S* gb = out.b.plane(n, c);
      for (Index q = 0; q < h * w; ++q) {
        ga[q] = tmx[q] + S(2) * x[q] * texx[q] + y[q] * texy[q];
        gb[q] = tmy[q] + S(2) * y[q] * teyy[q] + x[q] * texy[q];
      }
    }
  return out;
}

}  // namespace hullsight::similarity

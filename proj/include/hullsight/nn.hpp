#pragma once

// Neural-network primitives over 4-D tensors. Each op has a pure forward
// function and a matching backward function returning input gradients.
// The autodiff graph in graph.hpp wraps these; they are also usable alone.

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hullsight/tensor.hpp"

namespace hullsight::nn {

template <typename S>
using RowMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowMatrixMap = Eigen::Map<RowMatrix<S>>;
template <typename S>
using ConstRowMatrixMap = Eigen::Map<const RowMatrix<S>>;

struct ConvSpec {
  Index in_channels = 1;
  Index out_channels = 1;
  Index kernel_h = 3;
  Index kernel_w = 3;
  Index stride = 1;
  // Unset means "same" padding for stride 1: kernel / 2 on each axis.
  std::optional<Index> padding;
  bool bias = true;

  Index pad_h() const { return padding.value_or(kernel_h / 2); }
  Index pad_w() const { return padding.value_or(kernel_w / 2); }
  Index out_h(Index h) const { return (h + 2 * pad_h() - kernel_h) / stride + 1; }
  Index out_w(Index w) const { return (w + 2 * pad_w() - kernel_w) / stride + 1; }
  Index taps() const { return kernel_h * kernel_w; }

  void validate() const {
    if (in_channels <= 0 || out_channels <= 0 || kernel_h <= 0 || kernel_w <= 0 || stride <= 0) {
      throw ValueError("conv spec needs positive channels, kernel and stride");
    }
    if (padding && *padding < 0) throw ValueError("conv padding must be non-negative");
  }
};

inline Shape weight_shape(const ConvSpec& s) { return {s.out_channels, s.in_channels, s.kernel_h, s.kernel_w}; }
inline Shape depthwise_weight_shape(const ConvSpec& s) { return {s.in_channels, 1, s.kernel_h, s.kernel_w}; }
inline Shape bias_shape(Index channels) { return {1, channels, 1, 1}; }

struct GradRequest {
  bool x = true;
  bool w = true;
  bool b = true;
  bool offsets = true;
};

template <typename S>
struct ConvGrads {
  Tensor<S> x;
  Tensor<S> w;
  Tensor<S> b;
  Tensor<S> offsets;
};

namespace detail {

inline Shape conv_output_shape(const Shape& x, const ConvSpec& spec, const char* op) {
  spec.validate();
  if (x.c != spec.in_channels) {
    throw ShapeError({}, {x.n, spec.in_channels, x.h, x.w}, x, std::string(op) + ": input channel mismatch");
  }
  const Index oh = (x.h + 2 * spec.pad_h() - spec.kernel_h);
  const Index ow = (x.w + 2 * spec.pad_w() - spec.kernel_w);
  if (oh < 0 || ow < 0) {
    throw ShapeError({}, {x.n, x.c, spec.kernel_h - 2 * spec.pad_h(), spec.kernel_w - 2 * spec.pad_w()}, x,
                     std::string(op) + ": kernel larger than padded input");
  }
  return {x.n, spec.out_channels, oh / spec.stride + 1, ow / spec.stride + 1};
}

template <typename S>
void check_bias(const Tensor<S>* b, Index channels, const char* op) {
  if (b) require_same_shape(bias_shape(channels), b->shape(), op);
}

template <typename S>
void im2col(const Tensor<S>& x, Index n, const ConvSpec& spec, Index oh, Index ow, RowMatrix<S>& col) {
  const Index kh = spec.kernel_h, kw = spec.kernel_w, st = spec.stride;
  const Index ph = spec.pad_h(), pw = spec.pad_w();
  col.resize(x.c() * kh * kw, oh * ow);
  for (Index c = 0; c < x.c(); ++c) {
    const S* src = x.plane(n, c);
    for (Index i = 0; i < kh; ++i) {
      for (Index j = 0; j < kw; ++j) {
        S* row = col.row((c * kh + i) * kw + j).data();
        for (Index oy = 0; oy < oh; ++oy) {
          const Index iy = oy * st - ph + i;
          for (Index ox = 0; ox < ow; ++ox) {
            const Index ix = ox * st - pw + j;
            row[oy * ow + ox] = (iy >= 0 && iy < x.h() && ix >= 0 && ix < x.w()) ? src[iy * x.w() + ix] : S(0);
          }
        }
      }
    }
  }
}

template <typename S>
void col2im_add(const RowMatrix<S>& col, Index n, const ConvSpec& spec, Index oh, Index ow, Tensor<S>& gx) {
  const Index kh = spec.kernel_h, kw = spec.kernel_w, st = spec.stride;
  const Index ph = spec.pad_h(), pw = spec.pad_w();
  for (Index c = 0; c < gx.c(); ++c) {
    S* dst = gx.plane(n, c);
    for (Index i = 0; i < kh; ++i) {
      for (Index j = 0; j < kw; ++j) {
        const S* row = col.row((c * kh + i) * kw + j).data();
        for (Index oy = 0; oy < oh; ++oy) {
          const Index iy = oy * st - ph + i;
          if (iy < 0 || iy >= gx.h()) continue;
          for (Index ox = 0; ox < ow; ++ox) {
            const Index ix = ox * st - pw + j;
            if (ix >= 0 && ix < gx.w()) dst[iy * gx.w() + ix] += row[oy * ow + ox];
          }
        }
      }
    }
  }
}

// Bilinear sample of a zero-padded plane together with the corner weights
// and their derivatives with respect to the sample position.
template <typename S>
struct BilinearTap {
  Index index[4] = {-1, -1, -1, -1};
  S weight[4] = {};
  S d_y[4] = {};
  S d_x[4] = {};

  BilinearTap(Index height, Index width, S py, S px) {
    if (py <= S(-1) || py >= S(height) || px <= S(-1) || px >= S(width)) return;
    const Index y0 = static_cast<Index>(std::floor(py));
    const Index x0 = static_cast<Index>(std::floor(px));
    const S ly = py - S(y0), lx = px - S(x0);
    const S hy = S(1) - ly, hx = S(1) - lx;
    const Index ys[4] = {y0, y0, y0 + 1, y0 + 1};
    const Index xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const S wt[4] = {hy * hx, hy * lx, ly * hx, ly * lx};
    const S dy[4] = {-hx, -lx, hx, lx};
    const S dx[4] = {-hy, hy, -ly, ly};
    for (int k = 0; k < 4; ++k) {
      if (ys[k] >= 0 && ys[k] < height && xs[k] >= 0 && xs[k] < width) {
        index[k] = ys[k] * width + xs[k];
        weight[k] = wt[k];
        d_y[k] = dy[k];
        d_x[k] = dx[k];
      }
    }
  }

  S sample(const S* plane) const {
    S v = 0;
    for (int k = 0; k < 4; ++k)
      if (index[k] >= 0) v += weight[k] * plane[index[k]];
    return v;
  }
};

template <typename S>
void deform_im2col(const Tensor<S>& x, const Tensor<S>& offsets, Index n, const ConvSpec& spec, Index oh,
                   Index ow, RowMatrix<S>& col) {
  const Index kh = spec.kernel_h, kw = spec.kernel_w, st = spec.stride;
  const Index ph = spec.pad_h(), pw = spec.pad_w();
  col.resize(x.c() * kh * kw, oh * ow);
  for (Index i = 0; i < kh; ++i) {
    for (Index j = 0; j < kw; ++j) {
      const Index tap = i * kw + j;
      const S* off_y = offsets.plane(n, 2 * tap);
      const S* off_x = offsets.plane(n, 2 * tap + 1);
      for (Index oy = 0; oy < oh; ++oy) {
        for (Index ox = 0; ox < ow; ++ox) {
          const Index p = oy * ow + ox;
          const BilinearTap<S> t(x.h(), x.w(), S(oy * st - ph + i) + off_y[p], S(ox * st - pw + j) + off_x[p]);
          for (Index c = 0; c < x.c(); ++c) col((c * kh + i) * kw + j, p) = t.sample(x.plane(n, c));
        }
      }
    }
  }
}

}  // namespace detail

// Cross-correlation with zero padding. `b` may be null.
template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>* b, const ConvSpec& spec) {
  const Shape out = detail::conv_output_shape(x.shape(), spec, "conv2d");
  require_same_shape(weight_shape(spec), w.shape(), "conv2d weight");
  detail::check_bias(b, spec.out_channels, "conv2d bias");
  Tensor<S> y(out);
  const ConstRowMatrixMap<S> wm(w.data(), spec.out_channels, spec.in_channels * spec.taps());
  RowMatrix<S> col;
  for (Index n = 0; n < x.n(); ++n) {
    detail::im2col(x, n, spec, out.h, out.w, col);
    RowMatrixMap<S> yn(y.plane(n, 0), out.c, out.h * out.w);
    yn.noalias() = wm * col;
    if (b) yn.colwise() += Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(b->data(), out.c);
  }
  return y;
}

template <typename S>
ConvGrads<S> conv2d_backward(const Tensor<S>& x, const Tensor<S>& w, bool has_bias, const Tensor<S>& gy,
                             const ConvSpec& spec, GradRequest need = {}) {
  const Shape out = detail::conv_output_shape(x.shape(), spec, "conv2d");
  require_same_shape(out, gy.shape(), "conv2d output gradient");
  ConvGrads<S> g;
  if (need.x) g.x = Tensor<S>(x.shape());
  if (need.w) g.w = Tensor<S>(w.shape());
  if (need.b && has_bias) g.b = Tensor<S>(bias_shape(spec.out_channels));
  const Index k = spec.in_channels * spec.taps();
  const ConstRowMatrixMap<S> wm(w.data(), spec.out_channels, k);
  RowMatrixMap<S> gw(need.w ? g.w.data() : nullptr, spec.out_channels, need.w ? k : 0);
  RowMatrix<S> col, gcol;
  for (Index n = 0; n < x.n(); ++n) {
    const ConstRowMatrixMap<S> gyn(gy.plane(n, 0), out.c, out.h * out.w);
    if (need.w) {
      detail::im2col(x, n, spec, out.h, out.w, col);
      gw.noalias() += gyn * col.transpose();
    }
    if (need.b && has_bias) {
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(g.b.data(), out.c) += gyn.rowwise().sum();
    }
    if (need.x) {
      gcol.noalias() = wm.transpose() * gyn;
      detail::col2im_add(gcol, n, spec, out.h, out.w, g.x);
    }
  }
  return g;
}

// Depthwise convolution: one (1, kh, kw) filter per channel, groups = C.
template <typename S>
Tensor<S> depthwise_conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>* b, const ConvSpec& spec) {
  if (spec.in_channels != spec.out_channels) throw ValueError("depthwise conv needs in_channels == out_channels");
  const Shape out = detail::conv_output_shape(x.shape(), spec, "depthwise_conv2d");
  require_same_shape(depthwise_weight_shape(spec), w.shape(), "depthwise_conv2d weight");
  detail::check_bias(b, spec.out_channels, "depthwise_conv2d bias");
  Tensor<S> y(out);
  const Index st = spec.stride, ph = spec.pad_h(), pw = spec.pad_w();
  for (Index n = 0; n < x.n(); ++n) {
    for (Index c = 0; c < x.c(); ++c) {
      const S* src = x.plane(n, c);
      const S* k = w.plane(c, 0);
      S* dst = y.plane(n, c);
      const S bias = b ? (*b)[c] : S(0);
      for (Index oy = 0; oy < out.h; ++oy) {
        for (Index ox = 0; ox < out.w; ++ox) {
          S acc = 0;
          for (Index i = 0; i < spec.kernel_h; ++i) {
            const Index iy = oy * st - ph + i;
            if (iy < 0 || iy >= x.h()) continue;
            for (Index j = 0; j < spec.kernel_w; ++j) {
              const Index ix = ox * st - pw + j;
              if (ix >= 0 && ix < x.w()) acc += k[i * spec.kernel_w + j] * src[iy * x.w() + ix];
            }
          }
          dst[oy * out.w + ox] = acc + bias;
        }
      }
    }
  }
  return y;
}

template <typename S>
ConvGrads<S> depthwise_conv2d_backward(const Tensor<S>& x, const Tensor<S>& w, bool has_bias, const Tensor<S>& gy,
                                       const ConvSpec& spec, GradRequest need = {}) {
  const Shape out = detail::conv_output_shape(x.shape(), spec, "depthwise_conv2d");
  require_same_shape(out, gy.shape(), "depthwise_conv2d output gradient");
  ConvGrads<S> g;
  if (need.x) g.x = Tensor<S>(x.shape());
  if (need.w) g.w = Tensor<S>(w.shape());
  if (need.b && has_bias) g.b = Tensor<S>(bias_shape(spec.out_channels));
  const Index st = spec.stride, ph = spec.pad_h(), pw = spec.pad_w();
  for (Index n = 0; n < x.n(); ++n) {
    for (Index c = 0; c < x.c(); ++c) {
      const S* src = x.plane(n, c);
      const S* k = w.plane(c, 0);
      const S* gsrc = gy.plane(n, c);
      for (Index oy = 0; oy < out.h; ++oy) {
        for (Index ox = 0; ox < out.w; ++ox) {
          const S go = gsrc[oy * out.w + ox];
          if (need.b && has_bias) g.b[c] += go;
          for (Index i = 0; i < spec.kernel_h; ++i) {
            const Index iy = oy * st - ph + i;
            if (iy < 0 || iy >= x.h()) continue;
            for (Index j = 0; j < spec.kernel_w; ++j) {
              const Index ix = ox * st - pw + j;
              if (ix < 0 || ix >= x.w()) continue;
              const Index xi = iy * x.w() + ix;
              if (need.w) g.w.plane(c, 0)[i * spec.kernel_w + j] += go * src[xi];
              if (need.x) g.x.plane(n, c)[xi] += go * k[i * spec.kernel_w + j];
            }
          }
        }
      }
    }
  }
  return g;
}

inline Shape deform_offset_shape(const Shape& x, const ConvSpec& spec) {
  return {x.n, 2 * spec.taps(), spec.out_h(x.h), spec.out_w(x.w)};
}

// Deformable convolution (offsets only, one offset group). Offset channel
// 2*(i*kw+j) holds the row displacement of tap (i, j), the next one the
// column displacement. Samples are bilinear; outside the input reads zero.
template <typename S>
Tensor<S> deform_conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& offsets, const Tensor<S>* b,
                        const ConvSpec& spec) {
  const Shape out = detail::conv_output_shape(x.shape(), spec, "deform_conv2d");
  require_same_shape(weight_shape(spec), w.shape(), "deform_conv2d weight");
  require_same_shape(deform_offset_shape(x.shape(), spec), offsets.shape(),
                     "deform_conv2d offsets need 2*kh*kw channels at output resolution");
  detail::check_bias(b, spec.out_channels, "deform_conv2d bias");
  Tensor<S> y(out);
  const ConstRowMatrixMap<S> wm(w.data(), spec.out_channels, spec.in_channels * spec.taps());
  RowMatrix<S> col;
  for (Index n = 0; n < x.n(); ++n) {
    detail::deform_im2col(x, offsets, n, spec, out.h, out.w, col);
    RowMatrixMap<S> yn(y.plane(n, 0), out.c, out.h * out.w);
    yn.noalias() = wm * col;
    if (b) yn.colwise() += Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(b->data(), out.c);
  }
  return y;
}

template <typename S>
ConvGrads<S> deform_conv2d_backward(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& offsets, bool has_bias,
                                    const Tensor<S>& gy, const ConvSpec& spec, GradRequest need = {}) {
  const Shape out = detail::conv_output_shape(x.shape(), spec, "deform_conv2d");
  require_same_shape(out, gy.shape(), "deform_conv2d output gradient");
  ConvGrads<S> g;
  if (need.x) g.x = Tensor<S>(x.shape());
  if (need.w) g.w = Tensor<S>(w.shape());
  if (need.b && has_bias) g.b = Tensor<S>(bias_shape(spec.out_channels));
  if (need.offsets) g.offsets = Tensor<S>(offsets.shape());
  const Index kh = spec.kernel_h, kw = spec.kernel_w, st = spec.stride;
  const Index ph = spec.pad_h(), pw = spec.pad_w();
  const Index k = spec.in_channels * spec.taps();
  const ConstRowMatrixMap<S> wm(w.data(), spec.out_channels, k);
  RowMatrixMap<S> gw(need.w ? g.w.data() : nullptr, spec.out_channels, need.w ? k : 0);
  RowMatrix<S> col, gcol;
  for (Index n = 0; n < x.n(); ++n) {
    const ConstRowMatrixMap<S> gyn(gy.plane(n, 0), out.c, out.h * out.w);
    if (need.w) {
      detail::deform_im2col(x, offsets, n, spec, out.h, out.w, col);
      gw.noalias() += gyn * col.transpose();
    }
    if (need.b && has_bias) {
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(g.b.data(), out.c) += gyn.rowwise().sum();
    }
    if (!need.x && !need.offsets) continue;
    gcol.noalias() = wm.transpose() * gyn;
    for (Index i = 0; i < kh; ++i) {
      for (Index j = 0; j < kw; ++j) {
        const Index tap = i * kw + j;
        const S* off_y = offsets.plane(n, 2 * tap);
        const S* off_x = offsets.plane(n, 2 * tap + 1);
        for (Index oy = 0; oy < out.h; ++oy) {
          for (Index ox = 0; ox < out.w; ++ox) {
            const Index p = oy * out.w + ox;
            const detail::BilinearTap<S> t(x.h(), x.w(), S(oy * st - ph + i) + off_y[p],
                                           S(ox * st - pw + j) + off_x[p]);
            S d_py = 0, d_px = 0;
            for (Index c = 0; c < x.c(); ++c) {
              const S gc = gcol((c * kh + i) * kw + j, p);
              if (gc == S(0)) continue;
              const S* src = x.plane(n, c);
              for (int q = 0; q < 4; ++q) {
                if (t.index[q] < 0) continue;
                if (need.x) g.x.plane(n, c)[t.index[q]] += gc * t.weight[q];
                d_py += gc * t.d_y[q] * src[t.index[q]];
                d_px += gc * t.d_x[q] * src[t.index[q]];
              }
            }
            if (need.offsets) {
              g.offsets.plane(n, 2 * tap)[p] += d_py;
              g.offsets.plane(n, 2 * tap + 1)[p] += d_px;
            }
          }
        }
      }
    }
  }
  return g;
}

// (N, C, H, W) -> (N, C/r^2, H*r, W*r); out(n,c,h*r+dy,w*r+dx) = in(n, c*r*r + dy*r + dx, h, w).
template <typename S>
Tensor<S> pixel_shuffle(const Tensor<S>& x, Index r) {
  if (r <= 0) throw ValueError("pixel_shuffle factor must be positive");
  if (x.c() % (r * r) != 0) {
    throw ShapeError({}, {x.n(), (x.c() / (r * r) + 1) * r * r, x.h(), x.w()}, x.shape(),
                     "pixel_shuffle needs channels divisible by r^2");
  }
  const Index oc = x.c() / (r * r);
  Tensor<S> y({x.n(), oc, x.h() * r, x.w() * r});
  for (Index n = 0; n < x.n(); ++n)
    for (Index c = 0; c < oc; ++c)
      for (Index dy = 0; dy < r; ++dy)
        for (Index dx = 0; dx < r; ++dx) {
          const S* src = x.plane(n, c * r * r + dy * r + dx);
          for (Index h = 0; h < x.h(); ++h)
            for (Index w = 0; w < x.w(); ++w) y(n, c, h * r + dy, w * r + dx) = src[h * x.w() + w];
        }
  return y;
}

// Exact inverse of pixel_shuffle.
template <typename S>
Tensor<S> pixel_unshuffle(const Tensor<S>& x, Index r) {
  if (r <= 0) throw ValueError("pixel_unshuffle factor must be positive");
  if (x.h() % r != 0 || x.w() % r != 0) {
    throw ShapeError({}, {x.n(), x.c(), x.h() - x.h() % r, x.w() - x.w() % r}, x.shape(),
                     "pixel_unshuffle needs H and W divisible by r");
  }
  const Index oh = x.h() / r, ow = x.w() / r;
  Tensor<S> y({x.n(), x.c() * r * r, oh, ow});
  for (Index n = 0; n < x.n(); ++n)
    for (Index c = 0; c < x.c(); ++c)
      for (Index dy = 0; dy < r; ++dy)
        for (Index dx = 0; dx < r; ++dx) {
          S* dst = y.plane(n, c * r * r + dy * r + dx);
          for (Index h = 0; h < oh; ++h)
            for (Index w = 0; w < ow; ++w) dst[h * ow + w] = x(n, c, h * r + dy, w * r + dx);
        }
  return y;
}

template <typename S>
Tensor<S> relu(const Tensor<S>& x) {
  return Tensor<S>(x.shape(), x.array().max(S(0)));
}

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& x, const Tensor<S>& gy) {
  require_same_shape(x.shape(), gy.shape(), "relu output gradient");
  return Tensor<S>(x.shape(), (x.array() > S(0)).select(gy.array(), S(0)));
}

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a.shape(), b.shape(), "add operands");
  return Tensor<S>(a.shape(), a.array() + b.array());
}

// Stacks along the channel axis in argument order.
template <typename S>
Tensor<S> concat(const std::vector<const Tensor<S>*>& xs) {
  if (xs.empty()) throw ValueError("concat needs at least one input");
  const Shape first = xs.front()->shape();
  Index channels = 0;
  for (const Tensor<S>* t : xs) {
    const Shape s = t->shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError({}, {first.n, s.c, first.h, first.w}, s, "concat inputs must agree on N, H, W");
    }
    channels += s.c;
  }
  Tensor<S> y({first.n, channels, first.h, first.w});
  for (Index n = 0; n < first.n; ++n) {
    Index c0 = 0;
    for (const Tensor<S>* t : xs) {
      std::copy_n(t->plane(n, 0), t->c() * t->h() * t->w(), y.plane(n, c0));
      c0 += t->c();
    }
  }
  return y;
}

// Splits a channel-stacked gradient back into per-input pieces.
template <typename S>
std::vector<Tensor<S>> concat_backward(const std::vector<Shape>& shapes, const Tensor<S>& gy) {
  std::vector<Tensor<S>> out;
  out.reserve(shapes.size());
  for (const Shape& s : shapes) out.emplace_back(s);
  for (Index n = 0; n < gy.n(); ++n) {
    Index c0 = 0;
    for (Tensor<S>& t : out) {
      std::copy_n(gy.plane(n, c0), t.c() * t.h() * t.w(), t.plane(n, 0));
      c0 += t.c();
    }
  }
  return out;
}

}  // namespace hullsight::nn

#pragma once

// Graph builders for every differentiable primitive. Each builder appends one
// node and returns its reference, so networks read as nested calls.

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hullsight/graph.hpp"
#include "hullsight/nn.hpp"
#include "hullsight/similarity.hpp"

namespace hullsight::ops {

namespace detail {

template <typename S>
using Args = std::span<const Tensor<S>* const>;

template <typename S>
class Identity final : public Op<S> {
 public:
  std::string_view kind() const override { return "identity"; }
  Tensor<S> forward(Args<S> in) const override { return *in[0]; }
  void backward(Args<S>, const Tensor<S>&, const Tensor<S>& g, std::span<const bool>,
                std::span<Tensor<S>> grads) const override {
    grads[0] = g;
  }
};

template <typename S>
class Square final : public Op<S> {
 public:
  std::string_view kind() const override { return "square"; }
  Tensor<S> forward(Args<S> in) const override { return Tensor<S>(in[0]->shape(), in[0]->array().square()); }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool>,
                std::span<Tensor<S>> grads) const override {
    grads[0] = Tensor<S>(g.shape(), S(2) * in[0]->array() * g.array());
  }
};

template <typename S>
class Sum final : public Op<S> {
 public:
  std::string_view kind() const override { return "sum"; }
  Tensor<S> forward(Args<S> in) const override { return Tensor<S>::scalar(in[0]->array().sum()); }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool>,
                std::span<Tensor<S>> grads) const override {
    grads[0] = Tensor<S>::constant(in[0]->shape(), g.item());
  }
};

template <typename S>
class Add final : public Op<S> {
 public:
  std::string_view kind() const override { return "add"; }
  Tensor<S> forward(Args<S> in) const override { return nn::add(*in[0], *in[1]); }
  void backward(Args<S>, const Tensor<S>&, const Tensor<S>& g, std::span<const bool> wanted,
                std::span<Tensor<S>> grads) const override {
    if (wanted[0]) grads[0] = g;
    if (wanted[1]) grads[1] = g;
  }
};

template <typename S>
class Mul final : public Op<S> {
 public:
  std::string_view kind() const override { return "mul"; }
  Tensor<S> forward(Args<S> in) const override {
    require_same_shape(in[0]->shape(), in[1]->shape(), "mul operands");
    return Tensor<S>(in[0]->shape(), in[0]->array() * in[1]->array());
  }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool> wanted,
                std::span<Tensor<S>> grads) const override {
    if (wanted[0]) grads[0] = Tensor<S>(g.shape(), g.array() * in[1]->array());
    if (wanted[1]) grads[1] = Tensor<S>(g.shape(), g.array() * in[0]->array());
  }
};

template <typename S>
class Affine final : public Op<S> {
 public:
  Affine(S scale, S shift) : scale_(scale), shift_(shift) {}
  std::string_view kind() const override { return "affine"; }
  Tensor<S> forward(Args<S> in) const override {
    return Tensor<S>(in[0]->shape(), in[0]->array() * scale_ + shift_);
  }
  void backward(Args<S>, const Tensor<S>&, const Tensor<S>& g, std::span<const bool>,
                std::span<Tensor<S>> grads) const override {
    grads[0] = Tensor<S>(g.shape(), g.array() * scale_);
  }

 private:
  S scale_, shift_;
};

// numerator / max(x, floor); flat (zero gradient) below the floor.
template <typename S>
class FlooredInverse final : public Op<S> {
 public:
  FlooredInverse(S numerator, S floor) : numerator_(numerator), floor_(floor) {}
  std::string_view kind() const override { return "floored_inverse"; }
  Tensor<S> forward(Args<S> in) const override {
    return Tensor<S>(in[0]->shape(), numerator_ / in[0]->array().max(floor_));
  }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool>,
                std::span<Tensor<S>> grads) const override {
    const auto& x = in[0]->array();
    grads[0] = Tensor<S>(g.shape(), (x > floor_).select(-numerator_ * g.array() / x.square(), S(0)));
  }

 private:
  S numerator_, floor_;
};

template <typename S>
class Relu final : public Op<S> {
 public:
  std::string_view kind() const override { return "relu"; }
  Tensor<S> forward(Args<S> in) const override { return nn::relu(*in[0]); }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool>,
                std::span<Tensor<S>> grads) const override {
    grads[0] = nn::relu_backward(*in[0], g);
  }
};

template <typename S>
class Conv2d final : public Op<S> {
 public:
  explicit Conv2d(nn::ConvSpec spec) : spec_(spec) {}
  std::string_view kind() const override { return "conv2d"; }
  Tensor<S> forward(Args<S> in) const override {
    return nn::conv2d(*in[0], *in[1], in.size() > 2 ? in[2] : nullptr, spec_);
  }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool> wanted,
                std::span<Tensor<S>> grads) const override {
    const bool has_bias = in.size() > 2;
    auto r = nn::conv2d_backward(*in[0], *in[1], has_bias, g, spec_,
                                 {wanted[0], wanted[1], has_bias && wanted[2], false});
    grads[0] = std::move(r.x);
    grads[1] = std::move(r.w);
    if (has_bias) grads[2] = std::move(r.b);
  }

 private:
  nn::ConvSpec spec_;
};

template <typename S>
class DepthwiseConv2d final : public Op<S> {
 public:
  explicit DepthwiseConv2d(nn::ConvSpec spec) : spec_(spec) {}
  std::string_view kind() const override { return "depthwise_conv2d"; }
  Tensor<S> forward(Args<S> in) const override {
    return nn::depthwise_conv2d(*in[0], *in[1], in.size() > 2 ? in[2] : nullptr, spec_);
  }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool> wanted,
                std::span<Tensor<S>> grads) const override {
    const bool has_bias = in.size() > 2;
    auto r = nn::depthwise_conv2d_backward(*in[0], *in[1], has_bias, g, spec_,
                                           {wanted[0], wanted[1], has_bias && wanted[2], false});
    grads[0] = std::move(r.x);
    grads[1] = std::move(r.w);
    if (has_bias) grads[2] = std::move(r.b);
  }

 private:
  nn::ConvSpec spec_;
};

// Inputs: x, w, offsets[, b].
template <typename S>
class DeformConv2d final : public Op<S> {
 public:
  explicit DeformConv2d(nn::ConvSpec spec) : spec_(spec) {}
  std::string_view kind() const override { return "deform_conv2d"; }
  Tensor<S> forward(Args<S> in) const override {
    return nn::deform_conv2d(*in[0], *in[1], *in[2], in.size() > 3 ? in[3] : nullptr, spec_);
  }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool> wanted,
                std::span<Tensor<S>> grads) const override {
    const bool has_bias = in.size() > 3;
    auto r = nn::deform_conv2d_backward(*in[0], *in[1], *in[2], has_bias, g, spec_,
                                        {wanted[0], wanted[1], has_bias && wanted[3], wanted[2]});
    grads[0] = std::move(r.x);
    grads[1] = std::move(r.w);
    grads[2] = std::move(r.offsets);
    if (has_bias) grads[3] = std::move(r.b);
  }

 private:
  nn::ConvSpec spec_;
};

template <typename S>
class PixelShuffle final : public Op<S> {
 public:
  explicit PixelShuffle(Index r) : r_(r) {}
  std::string_view kind() const override { return "pixel_shuffle"; }
  Tensor<S> forward(Args<S> in) const override { return nn::pixel_shuffle(*in[0], r_); }
  void backward(Args<S>, const Tensor<S>&, const Tensor<S>& g, std::span<const bool>,
                std::span<Tensor<S>> grads) const override {
    grads[0] = nn::pixel_unshuffle(g, r_);
  }

 private:
  Index r_;
};

template <typename S>
class PixelUnshuffle final : public Op<S> {
 public:
  explicit PixelUnshuffle(Index r) : r_(r) {}
  std::string_view kind() const override { return "pixel_unshuffle"; }
  Tensor<S> forward(Args<S> in) const override { return nn::pixel_unshuffle(*in[0], r_); }
  void backward(Args<S>, const Tensor<S>&, const Tensor<S>& g, std::span<const bool>,
                std::span<Tensor<S>> grads) const override {
    grads[0] = nn::pixel_shuffle(g, r_);
  }

 private:
  Index r_;
};

template <typename S>
class Concat final : public Op<S> {
 public:
  std::string_view kind() const override { return "concat"; }
  Tensor<S> forward(Args<S> in) const override {
    return nn::concat(std::vector<const Tensor<S>*>(in.begin(), in.end()));
  }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool> wanted,
                std::span<Tensor<S>> grads) const override {
    std::vector<Shape> shapes;
    for (const Tensor<S>* t : in) shapes.push_back(t->shape());
    auto parts = nn::concat_backward(shapes, g);
    for (std::size_t i = 0; i < parts.size(); ++i)
      if (wanted[i]) grads[i] = std::move(parts[i]);
  }
};

template <typename S>
class MeanAbsError final : public Op<S> {
 public:
  std::string_view kind() const override { return "mean_abs_error"; }
  Tensor<S> forward(Args<S> in) const override {
    return Tensor<S>::scalar(similarity::mean_abs_error(*in[0], *in[1]));
  }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool> wanted,
                std::span<Tensor<S>> grads) const override {
    Tensor<S> ga = similarity::mean_abs_error_grad(*in[0], *in[1], g.item());
    if (wanted[1]) grads[1] = Tensor<S>(ga.shape(), -ga.array());
    if (wanted[0]) grads[0] = std::move(ga);
  }
};

template <typename S>
class Ssim final : public Op<S> {
 public:
  std::string_view kind() const override { return "ssim"; }
  Tensor<S> forward(Args<S> in) const override { return Tensor<S>::scalar(similarity::ssim(*in[0], *in[1])); }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool> wanted,
                std::span<Tensor<S>> grads) const override {
    auto r = similarity::ssim_grad(*in[0], *in[1], g.item());
    if (wanted[0]) grads[0] = std::move(r.a);
    if (wanted[1]) grads[1] = std::move(r.b);
  }
};

// PSNR in dB of two [0, 1] tensors, saturated at 100 dB.
template <typename S>
class Psnr final : public Op<S> {
 public:
  std::string_view kind() const override { return "psnr"; }
  Tensor<S> forward(Args<S> in) const override {
    return Tensor<S>::scalar(similarity::psnr_from_mse(similarity::mean_squared_error(*in[0], *in[1])));
  }
  void backward(Args<S> in, const Tensor<S>&, const Tensor<S>& g, std::span<const bool> wanted,
                std::span<Tensor<S>> grads) const override {
    const S mse = similarity::mean_squared_error(*in[0], *in[1]);
    const S scale = g.item() * similarity::psnr_mse_derivative(mse) * S(2) / S(in[0]->size());
    const auto diff = (in[0]->array() - in[1]->array()) * scale;
    if (wanted[0]) grads[0] = Tensor<S>(in[0]->shape(), diff);
    if (wanted[1]) grads[1] = Tensor<S>(in[0]->shape(), -diff);
  }
};

template <typename S, typename O, typename... A>
NodeRef append(Graph<S>& g, std::string name, std::vector<NodeRef> inputs, A&&... args) {
  return g.apply(std::move(name), std::make_unique<O>(std::forward<A>(args)...), std::move(inputs));
}

}  // namespace detail

template <typename S>
NodeRef identity(Graph<S>& g, std::string name, NodeRef x) {
  return detail::append<S, detail::Identity<S>>(g, std::move(name), {x});
}
template <typename S>
NodeRef square(Graph<S>& g, std::string name, NodeRef x) {
  return detail::append<S, detail::Square<S>>(g, std::move(name), {x});
}
template <typename S>
NodeRef sum(Graph<S>& g, std::string name, NodeRef x) {
  return detail::append<S, detail::Sum<S>>(g, std::move(name), {x});
}
template <typename S>
NodeRef add(Graph<S>& g, std::string name, NodeRef a, NodeRef b) {
  return detail::append<S, detail::Add<S>>(g, std::move(name), {a, b});
}
template <typename S>
NodeRef mul(Graph<S>& g, std::string name, NodeRef a, NodeRef b) {
  return detail::append<S, detail::Mul<S>>(g, std::move(name), {a, b});
}
template <typename S>
NodeRef affine(Graph<S>& g, std::string name, NodeRef x, S scale, S shift) {
  return detail::append<S, detail::Affine<S>>(g, std::move(name), {x}, scale, shift);
}
template <typename S>
NodeRef floored_inverse(Graph<S>& g, std::string name, NodeRef x, S numerator, S floor) {
  return detail::append<S, detail::FlooredInverse<S>>(g, std::move(name), {x}, numerator, floor);
}
template <typename S>
NodeRef relu(Graph<S>& g, std::string name, NodeRef x) {
  return detail::append<S, detail::Relu<S>>(g, std::move(name), {x});
}

template <typename S>
NodeRef conv2d(Graph<S>& g, std::string name, NodeRef x, NodeRef w, std::optional<NodeRef> b,
               const nn::ConvSpec& spec) {
  std::vector<NodeRef> in{x, w};
  if (b) in.push_back(*b);
  return detail::append<S, detail::Conv2d<S>>(g, std::move(name), std::move(in), spec);
}

template <typename S>
NodeRef depthwise_conv2d(Graph<S>& g, std::string name, NodeRef x, NodeRef w, std::optional<NodeRef> b,
                         const nn::ConvSpec& spec) {
  std::vector<NodeRef> in{x, w};
  if (b) in.push_back(*b);
  return detail::append<S, detail::DepthwiseConv2d<S>>(g, std::move(name), std::move(in), spec);
}

template <typename S>
NodeRef deform_conv2d(Graph<S>& g, std::string name, NodeRef x, NodeRef w, NodeRef offsets,
                      std::optional<NodeRef> b, const nn::ConvSpec& spec) {
  std::vector<NodeRef> in{x, w, offsets};
  if (b) in.push_back(*b);
  return detail::append<S, detail::DeformConv2d<S>>(g, std::move(name), std::move(in), spec);
}

template <typename S>
NodeRef pixel_shuffle(Graph<S>& g, std::string name, NodeRef x, Index r) {
  return detail::append<S, detail::PixelShuffle<S>>(g, std::move(name), {x}, r);
}
template <typename S>
NodeRef pixel_unshuffle(Graph<S>& g, std::string name, NodeRef x, Index r) {
  return detail::append<S, detail::PixelUnshuffle<S>>(g, std::move(name), {x}, r);
}
template <typename S>
NodeRef concat(Graph<S>& g, std::string name, std::vector<NodeRef> xs) {
  return detail::append<S, detail::Concat<S>>(g, std::move(name), std::move(xs));
}
template <typename S>
NodeRef mean_abs_error(Graph<S>& g, std::string name, NodeRef a, NodeRef b) {
  return detail::append<S, detail::MeanAbsError<S>>(g, std::move(name), {a, b});
}
template <typename S>
NodeRef ssim(Graph<S>& g, std::string name, NodeRef a, NodeRef b) {
  return detail::append<S, detail::Ssim<S>>(g, std::move(name), {a, b});
}
template <typename S>
NodeRef psnr(Graph<S>& g, std::string name, NodeRef a, NodeRef b) {
  return detail::append<S, detail::Psnr<S>>(g, std::move(name), {a, b});
}

}  // namespace hullsight::ops

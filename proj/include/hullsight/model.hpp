#pragma once

// Joint denoising / super-resolution network.
//
//   input ─ DeformConv ─ R1 x DepthConv ─┬──────────────────────────┐
//                                        └ unshuffle ─ R2 x ConvBlock ─ shuffle ┴ concat ─┬ 1x1 → denoised
//                                                                                         └ (conv3x3, shuffle) x log2(sr) ─ 1x1 → super-resolved
//
// DeformConv: a 3x3 conv predicts per-tap offsets for a 3x3 deformable conv.
// DepthConv: depthwise 3x3, pointwise 1x1, ReLU, additive skip.
// ConvBlock: 3x3 conv, ReLU, additive skip.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hullsight/graph.hpp"
#include "hullsight/noise.hpp"
#include "hullsight/ops.hpp"
#include "hullsight/quality.hpp"

namespace hullsight {

struct ModelConfig {
  Index base_channels = 8;
  Index r1 = 2;
  Index r2 = 2;
  Index sr_scale = 4;
  Index in_channels = 1;

  void validate() const;
  // Number of x2 pixel-shuffle stages in the super-resolution head.
  Index sr_stages() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ParameterSpec {
  std::string name;
  Shape shape;
  Index fan_in = 1;
  // Offset predictors start at zero so the deformable conv starts as a plain conv.
  bool zero_init = false;
};

std::vector<ParameterSpec> parameter_manifest(const ModelConfig& config);

// Channels must match the model and H, W must be even.
void check_input_shape(const ModelConfig& config, Shape input);
Index parameter_count(const ModelConfig& config);

// Uniform in +-sqrt(1 / fan_in), drawn from (seed, parameter index, element).
template <typename S>
ParameterList<S> init_parameters(const ModelConfig& config, std::uint64_t seed) {
  ParameterList<S> params;
  const auto manifest = parameter_manifest(config);
  for (std::size_t k = 0; k < manifest.size(); ++k) {
    const ParameterSpec& spec = manifest[k];
    Tensor<S> t(spec.shape);
    if (!spec.zero_init) {
      const double bound = std::sqrt(1.0 / double(spec.fan_in));
      for (Index i = 0; i < t.size(); ++i) {
        t[i] = S(bound * (2.0 * counter_uniform(seed, static_cast<std::uint64_t>(i), k + 1) - 1.0));
      }
    }
    params.emplace_back(spec.name, std::move(t));
  }
  return params;
}

struct NetworkHeads {
  NodeRef denoised;
  NodeRef super_resolved;
};

namespace detail {

inline nn::ConvSpec conv_spec(Index in, Index out, Index k) {
  nn::ConvSpec s;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel_h = s.kernel_w = k;
  return s;
}

template <typename S>
const Tensor<S>& find(const ParameterList<S>& params, const std::string& name) {
  for (const auto& [n, t] : params)
    if (n == name) return t;
  throw ConfigError("parameter '" + name + "' missing from parameter list");
}

}  // namespace detail

// Appends the network to `g`, registering every parameter from `params`.
template <typename S>
NetworkHeads add_network(Graph<S>& g, const ModelConfig& cfg, const ParameterList<S>& params, NodeRef input) {
  cfg.validate();
  const Index c = cfg.base_channels;
  const Index in = cfg.in_channels;
  auto param = [&](const std::string& name) { return g.parameter(name, detail::find(params, name)); };
  auto conv = [&](const std::string& name, NodeRef x, Index ci, Index co, Index k) {
    return ops::conv2d(g, name, x, param(name + ".weight"), param(name + ".bias"), detail::conv_spec(ci, co, k));
  };

  const NodeRef offsets = conv("deform.offset", input, in, 2 * 9, 3);
  NodeRef f = ops::relu(g, "deform.relu",
                        ops::deform_conv2d(g, "deform", input, param("deform.weight"), offsets, param("deform.bias"),
                                           detail::conv_spec(in, c, 3)));

  for (Index k = 0; k < cfg.r1; ++k) {
    const std::string p = "depth" + std::to_string(k);
    const NodeRef dw = ops::depthwise_conv2d(g, p + ".dw", f, param(p + ".dw.weight"), param(p + ".dw.bias"),
                                             detail::conv_spec(c, c, 3));
    f = ops::add(g, p + ".skip", f, ops::relu(g, p + ".relu", conv(p + ".pw", dw, c, c, 1)));
  }
  const NodeRef skip = f;

  NodeRef u = ops::pixel_unshuffle(g, "down", f, 2);
  for (Index k = 0; k < cfg.r2; ++k) {
    const std::string p = "block" + std::to_string(k);
    u = ops::add(g, p + ".skip", u, ops::relu(g, p + ".relu", conv(p + ".conv", u, 4 * c, 4 * c, 3)));
  }
  const NodeRef up = ops::pixel_shuffle(g, "up", u, 2);
  const NodeRef joined = ops::concat(g, "join", {skip, up});

  const NodeRef denoised = conv("head.denoise", joined, 2 * c, in, 1);

  NodeRef s = joined;
  Index ch = 2 * c;
  for (Index k = 0; k < cfg.sr_stages(); ++k) {
    const std::string p = "sr" + std::to_string(k);
    s = ops::relu(g, p + ".relu", ops::pixel_shuffle(g, p + ".shuffle", conv(p + ".conv", s, ch, 4 * c, 3), 2));
    ch = c;
  }
  const NodeRef super_resolved = conv("head.sr", s, ch, in, 1);
  return {denoised, super_resolved};
}

// Inputs: "input". Outputs: "denoised", "super_resolved".
template <typename S>
Graph<S> build_inference_graph(const ModelConfig& cfg, const ParameterList<S>& params, Shape input) {
  check_input_shape(cfg, input);
  Graph<S> g;
  const NodeRef x = g.input("input", input);
  const NetworkHeads heads = add_network(g, cfg, params, x);
  g.mark_output("denoised", heads.denoised);
  g.mark_output("super_resolved", heads.super_resolved);
  return g;
}

template <typename S>
Graph<S> build(const ModelConfig& cfg, std::uint64_t init_seed, Shape input) {
  return build_inference_graph<S>(cfg, init_parameters<S>(cfg, init_seed), input);
}

// Inputs: "noisy" (N,C,H,W), "clean_lr" (N,C,H,W), "clean_hr" (N,C,sH,sW),
// "lambda" and "beta" scalars. Outputs: "loss", "d_denoise", "d_sr",
// "denoised", "super_resolved".
template <typename S>
Graph<S> build_training_graph(const ModelConfig& cfg, const ParameterList<S>& params, Shape input) {
  check_input_shape(cfg, input);
  Graph<S> t;
  const NodeRef noisy = t.input("noisy", input);
  const NodeRef clean_lr = t.input("clean_lr", input);
  const NodeRef clean_hr =
      t.input("clean_hr", {input.n, input.c, input.h * cfg.sr_scale, input.w * cfg.sr_scale});
  const NodeRef lambda = t.input("lambda", kScalarShape);
  const NodeRef beta = t.input("beta", kScalarShape);
  const NetworkHeads heads = add_network(t, cfg, params, noisy);
  const NodeRef d_dn = distance_d(t, "d_denoise", clean_lr, heads.denoised);
  const NodeRef d_sr = distance_d(t, "d_sr", clean_hr, heads.super_resolved);
  const NodeRef loss = ops::add(t, "loss", ops::mul(t, "loss.denoise", lambda, d_dn), ops::mul(t, "loss.sr", beta, d_sr));
  t.mark_output("loss", loss);
  t.mark_output("d_denoise", d_dn);
  t.mark_output("d_sr", d_sr);
  t.mark_output("denoised", heads.denoised);
  t.mark_output("super_resolved", heads.super_resolved);
  return t;
}

}  // namespace hullsight

#pragma once

#include <cmath>
#include <string>

#include "hullsight/graph.hpp"

namespace hullsight {

struct SgdOptions {
  double lr = 1e-5;
  double momentum = 0.9;
  double weight_decay = 1e-4;

  void validate() const {
    if (!(lr > 0) || !std::isfinite(lr)) throw ValueError("sgd learning rate must be positive");
    if (!(momentum >= 0 && momentum < 1)) throw ValueError("sgd momentum must lie in [0, 1)");
    if (!(weight_decay >= 0) || !std::isfinite(weight_decay)) throw ValueError("sgd weight decay must be >= 0");
  }
};

// Momentum buffers keyed by parameter name; created as zeros on first use.
template <typename S>
struct SgdState {
  TensorMap<S> velocity;
};

// g' = g + wd * theta;  v = momentum * v + g';  theta -= lr * v.
// All gradients are checked before any parameter changes.
template <typename S>
void sgd_step(ParameterList<S>& params, const TensorMap<S>& grads, SgdState<S>& state, const SgdOptions& opt) {
  opt.validate();
  for (const auto& [name, value] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) throw ValueError("no gradient for parameter '" + name + "'");
    require_same_shape(value.shape(), it->second.shape(), "sgd gradient");
    if (!it->second.array().isFinite().all()) throw DataError("non-finite gradient for parameter '" + name + "'");
  }
  const S lr = S(opt.lr), mu = S(opt.momentum), wd = S(opt.weight_decay);
  for (auto& [name, value] : params) {
    const Tensor<S>& g = grads.find(name)->second;
    auto [vit, inserted] = state.velocity.try_emplace(name, value.shape());
    Tensor<S>& v = vit->second;
    require_same_shape(value.shape(), v.shape(), "sgd momentum buffer");
    v.array() = mu * v.array() + (g.array() + wd * value.array());
    value.array() -= lr * v.array();
  }
}

}  // namespace hullsight

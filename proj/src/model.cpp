#include "hullsight/model.hpp"

#include <string>

namespace hullsight {

void ModelConfig::validate() const {
  if (base_channels <= 0) throw ConfigError("base_channels must be positive");
  if (r1 < 1 || r2 < 1) throw ConfigError("r1 and r2 must be >= 1");
  if (in_channels != 1 && in_channels != 3) throw ConfigError("in_channels must be 1 or 3");
  if (sr_scale < 1 || (sr_scale & (sr_scale - 1)) != 0) throw ConfigError("sr_scale must be a power of 2");
}

Index ModelConfig::sr_stages() const {
  Index stages = 0;
  for (Index s = sr_scale; s > 1; s /= 2) ++stages;
  return stages;
}

void check_input_shape(const ModelConfig& config, Shape input) {
  if (input.c != config.in_channels) {
    throw ConfigError("input has " + std::to_string(input.c) + " channels, model expects " +
                      std::to_string(config.in_channels));
  }
  if (input.h % 2 != 0 || input.w % 2 != 0) {
    throw ConfigError("input height and width must be divisible by 2, got " + to_string(input));
  }
}

std::vector<ParameterSpec> parameter_manifest(const ModelConfig& cfg) {
  cfg.validate();
  const Index c = cfg.base_channels, in = cfg.in_channels;
  std::vector<ParameterSpec> m;
  auto conv = [&](const std::string& name, Index ci, Index co, Index k, bool zero = false) {
    m.push_back({name + ".weight", {co, ci, k, k}, ci * k * k, zero});
    m.push_back({name + ".bias", {1, co, 1, 1}, ci * k * k, zero});
  };
  conv("deform.offset", in, 18, 3, true);
  conv("deform", in, c, 3);
  for (Index k = 0; k < cfg.r1; ++k) {
    const std::string p = "depth" + std::to_string(k);
    m.push_back({p + ".dw.weight", {c, 1, 3, 3}, 9, false});
    m.push_back({p + ".dw.bias", {1, c, 1, 1}, 9, false});
    conv(p + ".pw", c, c, 1);
  }
  for (Index k = 0; k < cfg.r2; ++k) conv("block" + std::to_string(k) + ".conv", 4 * c, 4 * c, 3);
  conv("head.denoise", 2 * c, in, 1);
  Index ch = 2 * c;
  for (Index k = 0; k < cfg.sr_stages(); ++k) {
    conv("sr" + std::to_string(k) + ".conv", ch, 4 * c, 3);
    ch = c;
  }
  conv("head.sr", ch, in, 1);
  return m;
}

Index parameter_count(const ModelConfig& config) {
  Index total = 0;
  for (const auto& p : parameter_manifest(config)) total += p.shape.numel();
  return total;
}

}  // namespace hullsight

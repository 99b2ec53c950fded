#pragma once

// Run configuration in a TOML subset: [section] headers and `key = value`
// lines with string, integer, float or boolean values; `#` comments.
//
//   seed = 7
//   [model]  base_channels r1 r2 sr_scale in_channels
//   [train]  lr momentum weight_decay batch epochs patch train_fraction
//            noise ("sp" | "shot") random_severity
//   [noise]  p p_salt p_pepper
//
// Unknown sections or keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "hullsight/train.hpp"

namespace hullsight {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::uint64_t seed = 0;

  void validate() const;
};

RunConfig parse_run_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

// HULLSIGHT_SEED, when set, replaces the configured seed.
inline constexpr const char* kSeedEnvVar = "HULLSIGHT_SEED";
void apply_seed_override(RunConfig& cfg, std::optional<std::string_view> env_value);

}  // namespace hullsight

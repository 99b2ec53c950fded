#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hullsight/model.hpp"

namespace hullsight {

// On disk: "DDSR" | u32 version | u64 header length | JSON header | payload,
// integers little-endian; payload holds little-endian float32 values of every
// manifest parameter in header order.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  ModelConfig model;
  std::uint64_t seed = 0;
  int epoch = 0;
  ParameterList<float> parameters;
};

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt);
Checkpoint deserialize(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hullsight

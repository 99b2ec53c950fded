#pragma once

// Procedural stand-ins for hull imagery: shaded capsules on a smooth,
// slowly varying background. Every value is a function of the seed.

#include <cstdint>
#include <vector>

#include "hullsight/detection.hpp"
#include "hullsight/image.hpp"

namespace hullsight {

struct SceneOptions {
  int width = 128;
  int height = 128;
  int channels = 1;
  int min_hulls = 2;
  int max_hulls = 5;
  double min_length = 0.25;  // capsule length as a fraction of min(width, height)
  double max_length = 0.6;

  void validate() const;
};

struct SyntheticScene {
  Image image;
  std::vector<GroundTruth> hulls;  // axis-aligned extents, class 0
};

SyntheticScene make_hull_scene(const SceneOptions& opts, std::uint64_t seed);

std::vector<Image> make_hull_images(const SceneOptions& opts, std::uint64_t seed, int count);

}  // namespace hullsight

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hullsight/detection.hpp"

namespace testing {

struct DetectionInstance {
  std::vector<hullsight::Detection> dets;
  std::vector<hullsight::GroundTruth> gts;
};

// Up to 5 ground truths and 5 detections over 2 classes and 2 images, on a
// coarse grid so IoU ties and exact threshold hits occur.
inline DetectionInstance random_detection_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return int(rng() % std::uint64_t(n)); };
  auto box = [&] {
    const double x = pick(6), y = pick(6);
    return hullsight::BBox{x, y, x + 1 + pick(4), y + 1 + pick(4)};
  };
  DetectionInstance in;
  const int ng = pick(6), nd = pick(6);
  for (int i = 0; i < ng; ++i) in.gts.push_back({box(), pick(2), pick(2) ? "a" : "b"});
  for (int i = 0; i < nd; ++i) {
    hullsight::Detection d{box(), pick(2), pick(5) / 4.0, pick(2) ? "a" : "b"};
    if (!in.gts.empty() && pick(2)) {  // jitter a ground truth so matches happen
      const auto& g = in.gts[std::size_t(pick(int(in.gts.size())))];
      d.box = {g.box.x_min + pick(2) * 0.5, g.box.y_min, g.box.x_max, g.box.y_max + pick(2)};
      d.class_id = g.class_id;
      d.image_id = g.image_id;
    }
    in.dets.push_back(d);
  }
  return in;
}

}  // namespace testing

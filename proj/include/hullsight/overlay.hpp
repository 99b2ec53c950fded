#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "hullsight/detection.hpp"
#include "hullsight/image.hpp"

namespace hullsight {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kOverlayNormal{0, 200, 0};
inline constexpr Rgb kOverlayFlagged{230, 0, 0};

struct OverlayBox {
  BBox box;
  Rgb color = kOverlayNormal;
};

// RGB copy of `img` with each box outlined, clipped to the image.
Image draw_boxes(const Image& img, std::span<const OverlayBox> boxes, int thickness = 2);

}  // namespace hullsight

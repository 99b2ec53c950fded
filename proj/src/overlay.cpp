#include "hullsight/overlay.hpp"

#include <algorithm>
#include <cmath>

namespace hullsight {

Image draw_boxes(const Image& img, std::span<const OverlayBox> boxes, int thickness) {
  validate(img);
  if (thickness < 1) throw ValueError("overlay line thickness must be >= 1");
  Image out(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, img.channels == 3 ? c : 0);

  auto paint = [&](int x, int y, const Rgb& color) {
    if (x < 0 || y < 0 || x >= out.width || y >= out.height) return;
    for (int c = 0; c < 3; ++c) out.at(x, y, c) = color[c];
  };
  for (const OverlayBox& b : boxes) {
    b.box.validate();
    const int x0 = static_cast<int>(std::floor(b.box.x_min));
    const int y0 = static_cast<int>(std::floor(b.box.y_min));
    const int x1 = std::max(x0, static_cast<int>(std::ceil(b.box.x_max)) - 1);
    const int y1 = std::max(y0, static_cast<int>(std::ceil(b.box.y_max)) - 1);
    for (int t = 0; t < thickness; ++t) {
      for (int x = x0; x <= x1; ++x) {
        paint(x, y0 + t, b.color);
        paint(x, y1 - t, b.color);
      }
      for (int y = y0; y <= y1; ++y) {
        paint(x0 + t, y, b.color);
        paint(x1 - t, y, b.color);
      }
    }
  }
  return out;
}

}  // namespace hullsight

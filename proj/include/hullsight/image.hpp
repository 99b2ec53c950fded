#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hullsight/tensor.hpp"

namespace hullsight {

// Decoded 8-bit raster, pixels interleaved row-major (y, x, channel).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  int bit_depth = 8;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

// Throws ValueError unless the image is a consistent 8-bit gray/RGB raster.
void validate(const Image& img);

// (1, C, H, W) tensor with values in [0, 1].
template <typename S>
Tensor<S> to_tensor(const Image& img) {
  validate(img);
  Tensor<S> t({1, img.channels, img.height, img.width});
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) t(0, c, y, x) = S(img.at(x, y, c)) / S(255);
  return t;
}

// Clamps sample `n` of `t` to [0, 1] and quantizes to 8 bits.
template <typename S>
Image to_image(const Tensor<S>& t, Index n = 0) {
  if (t.c() != 1 && t.c() != 3) throw ValueError("only 1- or 3-channel tensors convert to images");
  Image img(static_cast<int>(t.w()), static_cast<int>(t.h()), static_cast<int>(t.c()));
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        double v = double(t(n, c, y, x));
        v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
        img.at(x, y, c) = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
  return img;
}

// Average over factor x factor blocks, rounded to nearest.
Image box_downscale(const Image& img, int factor);

Image crop(const Image& img, int x0, int y0, int w, int h);

// PNG (8-bit gray or RGB) and binary PGM/PPM (maxval 255), chosen by extension.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& img, const std::filesystem::path& path);

bool is_image_file(const std::filesystem::path& path);

}  // namespace hullsight

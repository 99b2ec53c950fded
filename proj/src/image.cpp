#include "hullsight/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace hullsight {

namespace {

std::string lower_ext(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Checks signature and IHDR by hand so unsupported depths fail loudly
// instead of being converted by libpng.
void check_png_header(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  static constexpr std::array<std::uint8_t, 8> kSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 33 || !std::equal(kSignature.begin(), kSignature.end(), bytes.begin())) {
    throw FormatError("'" + name + "' is not a PNG file or is truncated");
  }
  const int bit_depth = bytes[24];
  const int color_type = bytes[25];
  if (bit_depth != 8 && !(color_type == 0 && bit_depth < 8) && !(color_type == 3)) {
    throw FormatError("'" + name + "': unsupported PNG bit depth " + std::to_string(bit_depth) + " (8-bit only)");
  }
  if (color_type == 4 || color_type == 6) {
    throw FormatError("'" + name + "': PNG with alpha channel is not supported");
  }
}

Image load_png(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  check_png_header(bytes, path.string());
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw FormatError("'" + path.string() + "': " + png.message);
  }
  const bool gray = (png.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Image img(static_cast<int>(png.width), static_cast<int>(png.height), gray ? 1 : 3);
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw FormatError("'" + path.string() + "': " + msg);
  }
  return img;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw FormatError("cannot write '" + path.string() + "': " + png.message);
  }
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pnm_token(const std::vector<std::uint8_t>& b, std::size_t& pos, const std::string& name) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok += static_cast<char>(b[pos++]);
  if (tok.empty()) throw FormatError("'" + name + "': truncated PNM header");
  return tok;
}

int pnm_int(const std::string& tok, const std::string& name) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw FormatError("'" + name + "': malformed PNM header field '" + tok + "'");
  }
  return std::stoi(tok);
}

Image load_pnm(const std::filesystem::path& path) {
  const auto b = read_bytes(path);
  const std::string name = path.string();
  std::size_t pos = 0;
  const std::string magic = pnm_token(b, pos, name);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw FormatError("'" + name + "': only binary PGM (P5) and PPM (P6) are supported");
  }
  const int w = pnm_int(pnm_token(b, pos, name), name);
  const int h = pnm_int(pnm_token(b, pos, name), name);
  const int maxval = pnm_int(pnm_token(b, pos, name), name);
  if (maxval != 255) {
    throw FormatError("'" + name + "': unsupported PNM maxval " + std::to_string(maxval) + " (8-bit only)");
  }
  if (w <= 0 || h <= 0) throw FormatError("'" + name + "': empty PNM image");
  ++pos;  // single whitespace after maxval
  Image img(w, h, channels);
  if (b.size() < pos + img.pixels.size()) throw FormatError("'" + name + "': truncated PNM pixel data");
  std::copy_n(b.begin() + static_cast<std::ptrdiff_t>(pos), img.pixels.size(), img.pixels.begin());
  return img;
}

void save_pnm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

}  // namespace

void validate(const Image& img) {
  if (img.bit_depth != 8) throw ValueError("only 8-bit images are supported");
  if (img.channels != 1 && img.channels != 3) throw ValueError("images must have 1 or 3 channels");
  if (img.width < 0 || img.height < 0 || img.pixels.size() != img.pixel_count() * img.channels) {
    throw ValueError("image pixel buffer does not match its extents");
  }
}

Image box_downscale(const Image& img, int factor) {
  validate(img);
  if (factor <= 0) throw ValueError("downscale factor must be positive");
  if (img.width % factor != 0 || img.height % factor != 0) {
    throw ValueError("image extents must be divisible by the downscale factor");
  }
  Image out(img.width / factor, img.height / factor, img.channels);
  const int area = factor * factor;
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        int sum = 0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) sum += img.at(x * factor + dx, y * factor + dy, c);
        out.at(x, y, c) = static_cast<std::uint8_t>((sum + area / 2) / area);
      }
  return out;
}

Image crop(const Image& img, int x0, int y0, int w, int h) {
  validate(img);
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > img.width || y0 + h > img.height) {
    throw ValueError("crop window outside the image");
  }
  Image out(w, h, img.channels);
  for (int y = 0; y < h; ++y)
    std::copy_n(&img.pixels[(static_cast<std::size_t>(y0 + y) * img.width + x0) * img.channels],
                static_cast<std::size_t>(w) * img.channels, &out.pixels[static_cast<std::size_t>(y) * w * img.channels]);
  return out;
}

bool is_image_file(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

Image load_image(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm" || ext == ".ppm") return load_pnm(path);
  throw FormatError("unsupported image format '" + path.string() + "' (PNG, PGM, PPM)");
}

void save_image(const Image& img, const std::filesystem::path& path) {
  validate(img);
  const std::string ext = lower_ext(path);
  if (ext == ".png") return save_png(img, path);
  if (ext == ".pgm" || ext == ".ppm") {
    if ((ext == ".pgm") != (img.channels == 1)) {
      throw FormatError("'" + path.string() + "': PGM holds gray images, PPM holds RGB images");
    }
    return save_pnm(img, path);
  }
  throw FormatError("unsupported image format '" + path.string() + "' (PNG, PGM, PPM)");
}

}  // namespace hullsight

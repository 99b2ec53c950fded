#include "hullsight/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hullsight/errors.hpp"

namespace hullsight {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& msg) {
  throw FormatError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

double parse_unit(std::string_view tok, std::string_view source, std::size_t line, const char* field) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    fail(source, line, std::string(field) + " '" + std::string(tok) + "' is not a number");
  }
  if (v < 0 || v > 1) fail(source, line, std::string(field) + " " + std::string(tok) + " outside [0, 1]");
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open annotation file '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

ImageSize parse_image_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  ImageSize s;
  auto num = [&](std::string_view t, int& out) {
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size() && !t.empty() && out > 0;
  };
  if (x == std::string_view::npos || !num(text.substr(0, x), s.width) || !num(text.substr(x + 1), s.height)) {
    throw ValueError("image size must look like WxH with positive integers, got '" + std::string(text) + "'");
  }
  return s;
}

std::vector<AnnotationRecord> parse_annotation_text(std::string_view text, std::string_view source, RecordKind kind) {
  std::vector<AnnotationRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto f = split_ws(line);
    if (f.empty()) continue;
    const bool ok = (kind == RecordKind::ground_truth && f.size() == 5) ||
                    (kind == RecordKind::prediction && f.size() == 6) ||
                    (kind == RecordKind::either && (f.size() == 5 || f.size() == 6));
    if (!ok) {
      const char* expected = kind == RecordKind::ground_truth ? "5"
                             : kind == RecordKind::prediction ? "6"
                                                              : "5 or 6";
      fail(source, line_no, "expected " + std::string(expected) + " fields, got " + std::to_string(f.size()));
    }
    AnnotationRecord r;
    r.line = line_no;
    const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), r.class_id);
    if (ec != std::errc() || ptr != f[0].data() + f[0].size() || r.class_id < 0) {
      fail(source, line_no, "class id '" + std::string(f[0]) + "' is not a non-negative integer");
    }
    r.cx = parse_unit(f[1], source, line_no, "cx");
    r.cy = parse_unit(f[2], source, line_no, "cy");
    r.w = parse_unit(f[3], source, line_no, "w");
    r.h = parse_unit(f[4], source, line_no, "h");
    if (f.size() == 6) r.confidence = parse_unit(f[5], source, line_no, "confidence");
    out.push_back(r);
  }
  return out;
}

std::vector<AnnotationRecord> read_annotation_file(const std::filesystem::path& path, RecordKind kind) {
  return parse_annotation_text(read_text(path), path.string(), kind);
}

BBox to_box(const AnnotationRecord& r, ImageSize size) {
  const double W = size.width, H = size.height;
  return {std::clamp((r.cx - r.w / 2) * W, 0.0, W), std::clamp((r.cy - r.h / 2) * H, 0.0, H),
          std::clamp((r.cx + r.w / 2) * W, 0.0, W), std::clamp((r.cy + r.h / 2) * H, 0.0, H)};
}

AnnotationRecord to_record(const BBox& box, int class_id, ImageSize size) {
  box.validate();
  AnnotationRecord r;
  r.class_id = class_id;
  r.cx = (box.x_min + box.x_max) / 2 / size.width;
  r.cy = (box.y_min + box.y_max) / 2 / size.height;
  r.w = box.width() / size.width;
  r.h = box.height() / size.height;
  return r;
}

std::vector<GroundTruth> parse_ground_truths(const std::filesystem::path& path, ImageSize size,
                                             const std::string& image_id) {
  std::vector<GroundTruth> out;
  for (const auto& r : read_annotation_file(path, RecordKind::ground_truth))
    out.push_back({to_box(r, size), r.class_id, image_id});
  return out;
}

std::vector<Detection> parse_detections(const std::filesystem::path& path, ImageSize size,
                                        const std::string& image_id) {
  std::vector<Detection> out;
  for (const auto& r : read_annotation_file(path, RecordKind::prediction))
    out.push_back({to_box(r, size), r.class_id, *r.confidence, image_id});
  return out;
}

}  // namespace hullsight

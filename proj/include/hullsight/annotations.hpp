#pragma once

// YOLO-style text annotations: one "class cx cy w h [conf]" record per line,
// geometry normalized to the image size.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hullsight/detection.hpp"

namespace hullsight {

struct ImageSize {
  int width = 0;
  int height = 0;
};

// Parses "WxH".
ImageSize parse_image_size(std::string_view text);

struct AnnotationRecord {
  int class_id = 0;
  double cx = 0;
  double cy = 0;
  double w = 0;
  double h = 0;
  std::optional<double> confidence;
  std::size_t line = 0;
};

enum class RecordKind { ground_truth, prediction, either };

// Blank lines are skipped. Errors carry "<source>:<line>:".
std::vector<AnnotationRecord> parse_annotation_text(std::string_view text, std::string_view source, RecordKind kind);
std::vector<AnnotationRecord> read_annotation_file(const std::filesystem::path& path, RecordKind kind);

// Corner box in pixels, clamped to the image.
BBox to_box(const AnnotationRecord& r, ImageSize size);
AnnotationRecord to_record(const BBox& box, int class_id, ImageSize size);

std::vector<GroundTruth> parse_ground_truths(const std::filesystem::path& path, ImageSize size,
                                             const std::string& image_id);
std::vector<Detection> parse_detections(const std::filesystem::path& path, ImageSize size,
                                        const std::string& image_id);

}  // namespace hullsight

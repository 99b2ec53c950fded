#pragma once

// Detection metrics: IoU, greedy matching, 101-point interpolated AP, and a
// dataset report with mAP@0.5, mAP@[.5:.95], precision and recall.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hullsight {

// Axis-aligned box in continuous pixel coordinates.
struct BBox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  void validate() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
  BBox box;
  int class_id = 0;
  double confidence = 1;
  std::string image_id;
};

struct GroundTruth {
  BBox box;
  int class_id = 0;
  std::string image_id;
};

// Intersection over union; 0 when the union is empty.
double iou(const BBox& a, const BBox& b);

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (detection, ground truth)
  std::vector<std::size_t> unmatched_detections;
  std::vector<std::size_t> unmatched_ground_truths;
};

// Greedy one-to-one matching for a single image. Detections go in descending
// confidence (ties: input order); each takes the unmatched same-class ground
// truth of highest IoU, provided IoU >= threshold.
MatchResult match(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold);

// Dataset-wide AP for one class. nullopt when the class has neither ground
// truths nor detections; 0 when it has detections but no ground truths.
std::optional<double> average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                        int class_id, double iou_threshold);

// {0.50, 0.55, ..., 0.95}
std::vector<double> coco_iou_thresholds();

struct EvalOptions {
  double confidence_threshold = 0.5;  // headline precision / recall only
  double iou_threshold = 0.5;         // headline precision / recall only
  // Classes to evaluate. Empty: the classes that occur in the ground truth.
  std::vector<int> known_classes;
};

struct ClassReport {
  int class_id = 0;
  std::vector<std::optional<double>> ap;  // per threshold of EvalReport::iou_thresholds
  std::size_t num_ground_truths = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalReport {
  std::vector<double> iou_thresholds;
  std::vector<ClassReport> classes;
  double map50 = 0;
  double map5095 = 0;
  double precision = 0;
  double recall = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  // Detection classes outside the evaluated set; those detections are ignored.
  std::vector<int> unknown_classes;
  std::size_t unknown_detections = 0;
};

EvalReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts, const EvalOptions& opts = {});

}  // namespace hullsight

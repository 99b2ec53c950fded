#include "hullsight/report.hpp"

namespace hullsight {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json to_json(const BBox& box) { return Json::array({box.x_min, box.y_min, box.x_max, box.y_max}); }

Json to_json(const MetricReport& m) { return Json{{"psnr_db", m.psnr_db}, {"ssim", m.ssim}}; }

Json to_json(const EvalReport& r) {
  Json classes = Json::array();
  for (const ClassReport& c : r.classes) {
    Json ap = Json::array();
    for (const auto& a : c.ap) ap.push_back(optional_number(a));
    classes.push_back({{"class_id", c.class_id},
                       {"ap50", optional_number(c.ap.empty() ? std::nullopt : c.ap.front())},
                       {"ap", ap},
                       {"num_ground_truths", c.num_ground_truths},
                       {"tp", c.tp},
                       {"fp", c.fp},
                       {"fn", c.fn}});
  }
  return Json{{"map50", r.map50},
              {"map50_95", r.map5095},
              {"precision", r.precision},
              {"recall", r.recall},
              {"tp", r.tp},
              {"fp", r.fp},
              {"fn", r.fn},
              {"iou_thresholds", r.iou_thresholds},
              {"classes", classes},
              {"unknown_classes", r.unknown_classes},
              {"unknown_detections", r.unknown_detections}};
}

Json to_json(const EpochLog& log) {
  return Json{{"epoch", log.epoch},
              {"lambda", log.weights.lambda},
              {"beta", log.weights.beta},
              {"mean_loss", log.mean_loss},
              {"val_denoise", to_json(log.val_denoise)},
              {"val_sr", to_json(log.val_sr)},
              {"val_noisy_input", to_json(log.val_noisy_input)}};
}

Json measurement_report(std::span<const Detection> dets, const std::optional<CalibrationScale>& scale) {
  if (scale) scale->validate();
  Json items = Json::array();
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const double d = diagonal(dets[i].box);
    Json item{{"index", i},
              {"class_id", dets[i].class_id},
              {"confidence", dets[i].confidence},
              {"box", to_json(dets[i].box)},
              {"diagonal_px", d}};
    if (scale) item["length_mm"] = to_millimeters(d, *scale);
    items.push_back(std::move(item));
  }
  Json out{{"count", dets.size()}};
  out["mm_per_pixel"] = scale ? Json(scale->mm_per_pixel) : Json(nullptr);
  out["detections"] = std::move(items);
  return out;
}

Json anomaly_report(std::span<const Detection> dets, const AnomalyResult& result) {
  Json items = Json::array();
  std::size_t next = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const bool flagged = next < result.flagged.size() && result.flagged[next] == i;
    if (flagged) ++next;
    items.push_back({{"index", i}, {"diagonal_px", diagonal(dets[i].box)}, {"anomalous", flagged}});
  }
  return Json{{"q1", result.q1},
              {"q3", result.q3},
              {"iqr", result.iqr},
              {"k", result.k},
              {"upper_bound", result.upper_bound},
              {"flagged", result.flagged},
              {"detections", items}};
}

}  // namespace hullsight

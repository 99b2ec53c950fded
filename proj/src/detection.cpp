#include "hullsight/detection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "hullsight/errors.hpp"

namespace hullsight {

namespace {

std::vector<std::size_t> by_confidence(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
  return order;
}

// Marks which detections (by index into `dets`) are true positives when
// matched image by image.
std::vector<bool> true_positive_flags(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                      double iou_threshold) {
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> by_image;
  for (std::size_t i = 0; i < dets.size(); ++i) by_image[dets[i].image_id].first.push_back(i);
  for (std::size_t i = 0; i < gts.size(); ++i) by_image[gts[i].image_id].second.push_back(i);
  std::vector<bool> tp(dets.size(), false);
  std::vector<Detection> d;
  std::vector<GroundTruth> g;
  for (const auto& [image, idx] : by_image) {
    d.clear();
    g.clear();
    for (std::size_t i : idx.first) d.push_back(dets[i]);
    for (std::size_t i : idx.second) g.push_back(gts[i]);
    for (const auto& [di, gi] : match(d, g, iou_threshold).matches) tp[idx.first[di]] = true;
  }
  return tp;
}

}  // namespace

void BBox::validate() const {
  if (!(std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) && std::isfinite(y_max))) {
    throw ValueError("box coordinates must be finite");
  }
  if (x_max < x_min || y_max < y_min) throw ValueError("box has max corner before min corner");
}

double iou(const BBox& a, const BBox& b) {
  const double iw = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double ih = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

MatchResult match(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold) {
  if (!(iou_threshold > 0 && iou_threshold <= 1)) throw ValueError("IoU threshold must lie in (0, 1]");
  MatchResult r;
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d : by_confidence(dets)) {
    double best = -1;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].class_id != dets[d].class_id) continue;
      const double v = iou(dets[d].box, gts[g].box);
      if (v >= iou_threshold && v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best >= 0) {
      taken[best_gt] = true;
      r.matches.emplace_back(d, best_gt);
    } else {
      r.unmatched_detections.push_back(d);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g)
    if (!taken[g]) r.unmatched_ground_truths.push_back(g);
  return r;
}

std::optional<double> average_precision(std::span<const Detection> all_dets, std::span<const GroundTruth> all_gts,
                                        int class_id, double iou_threshold) {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
  for (const auto& d : all_dets)
    if (d.class_id == class_id) dets.push_back(d);
  for (const auto& g : all_gts)
    if (g.class_id == class_id) gts.push_back(g);
  if (gts.empty()) return dets.empty() ? std::nullopt : std::optional<double>(0.0);
  if (dets.empty()) return 0.0;

  const std::vector<bool> tp = true_positive_flags(dets, gts, iou_threshold);
  const std::vector<std::size_t> order = by_confidence(dets);
  const std::size_t n = order.size();
  std::vector<std::size_t> tp_cum(n);
  std::vector<double> precision(n);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    hits += tp[order[k]] ? 1 : 0;
    tp_cum[k] = hits;
    precision[k] = double(hits) / double(k + 1);
  }
  for (std::size_t k = n - 1; k-- > 0;) precision[k] = std::max(precision[k], precision[k + 1]);

  // recall_k >= r/100  <=>  100 * tp_cum[k] >= r * n_gt, evaluated in integers.
  const std::size_t n_gt = gts.size();
  double sum = 0;
  std::size_t k = 0;
  for (std::size_t r = 0; r <= 100; ++r) {
    while (k < n && 100 * tp_cum[k] < r * n_gt) ++k;
    if (k == n) break;
    sum += precision[k];
  }
  return sum / 101.0;
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

EvalReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts, const EvalOptions& opts) {
  for (const auto& d : dets) {
    d.box.validate();
    if (!(d.confidence >= 0 && d.confidence <= 1)) throw ValueError("detection confidence must lie in [0, 1]");
  }
  for (const auto& g : gts) g.box.validate();

  std::set<int> classes(opts.known_classes.begin(), opts.known_classes.end());
  if (opts.known_classes.empty())
    for (const auto& g : gts) classes.insert(g.class_id);

  EvalReport report;
  report.iou_thresholds = coco_iou_thresholds();
  std::vector<Detection> known;
  std::set<int> unknown;
  for (const auto& d : dets) {
    if (classes.count(d.class_id)) {
      known.push_back(d);
    } else {
      unknown.insert(d.class_id);
      ++report.unknown_detections;
    }
  }
  report.unknown_classes.assign(unknown.begin(), unknown.end());

  std::vector<Detection> confident;
  for (const auto& d : known)
    if (d.confidence >= opts.confidence_threshold) confident.push_back(d);

  double sum50 = 0, sum_all = 0;
  std::size_t defined = 0;
  for (int c : classes) {
    ClassReport cr;
    cr.class_id = c;
    for (double t : report.iou_thresholds) cr.ap.push_back(average_precision(known, gts, c, t));
    for (const auto& g : gts) cr.num_ground_truths += g.class_id == c ? 1 : 0;

    std::vector<Detection> cd;
    std::vector<GroundTruth> cg;
    for (const auto& d : confident)
      if (d.class_id == c) cd.push_back(d);
    for (const auto& g : gts)
      if (g.class_id == c) cg.push_back(g);
    const std::vector<bool> tp = true_positive_flags(cd, cg, opts.iou_threshold);
    cr.tp = static_cast<std::size_t>(std::count(tp.begin(), tp.end(), true));
    cr.fp = cd.size() - cr.tp;
    cr.fn = cr.num_ground_truths - cr.tp;
    report.tp += cr.tp;
    report.fp += cr.fp;
    report.fn += cr.fn;

    if (cr.ap.front()) {
      ++defined;
      sum50 += *cr.ap.front();
      double s = 0;
      for (const auto& ap : cr.ap) s += *ap;
      sum_all += s / double(cr.ap.size());
    }
    report.classes.push_back(std::move(cr));
  }
  if (defined > 0) {
    report.map50 = sum50 / double(defined);
    report.map5095 = sum_all / double(defined);
  }
  if (report.tp + report.fp > 0) report.precision = double(report.tp) / double(report.tp + report.fp);
  if (report.tp + report.fn > 0) report.recall = double(report.tp) / double(report.tp + report.fn);
  return report;
}

}  // namespace hullsight

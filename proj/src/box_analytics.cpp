#include "hullsight/box_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hullsight/errors.hpp"

namespace hullsight {

double diagonal(const BBox& box) {
  box.validate();
  return std::hypot(box.width(), box.height());
}

void CalibrationScale::validate() const {
  if (!(mm_per_pixel > 0) || !std::isfinite(mm_per_pixel)) {
    throw ValueError("mm per pixel must be positive and finite");
  }
}

double to_millimeters(double pixels, const CalibrationScale& scale) {
  scale.validate();
  return pixels * scale.mm_per_pixel;
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw ValueError("quantile of an empty list");
  if (!(p >= 0 && p <= 1)) throw ValueError("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted)
    if (!std::isfinite(v)) throw ValueError("quantile input contains a non-finite value");
  std::sort(sorted.begin(), sorted.end());
  const double h = double(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::span<const double> values) {
  if (values.size() < 4) {
    throw DataError("quartiles need at least 4 values, got " + std::to_string(values.size()));
  }
  return {quantile(values, 0.25), quantile(values, 0.75)};
}

AnomalyResult flag_anomalies(std::span<const double> diagonals, double k) {
  if (!(k >= 0) || !std::isfinite(k)) throw ValueError("IQR factor k must be finite and >= 0");
  const Quartiles q = quartiles(diagonals);
  AnomalyResult r;
  r.q1 = q.q1;
  r.q3 = q.q3;
  r.iqr = q.q3 - q.q1;
  r.k = k;
  r.upper_bound = q.q3 + k * r.iqr;
  for (std::size_t i = 0; i < diagonals.size(); ++i)
    if (diagonals[i] > r.upper_bound) r.flagged.push_back(i);
  return r;
}

}  // namespace hullsight

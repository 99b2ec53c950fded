#pragma once

// Object length from bounding-box diagonals and IQR-based flagging of
// abnormally long objects (upper outliers only).

#include <cstddef>
#include <span>
#include <vector>

#include "hullsight/detection.hpp"

namespace hullsight {

double diagonal(const BBox& box);

struct CalibrationScale {
  double mm_per_pixel = 1;
  void validate() const;
};

double to_millimeters(double pixels, const CalibrationScale& scale);

struct Quartiles {
  double q1 = 0;
  double q3 = 0;
};

// Linear interpolation between order statistics at h = (n - 1) * p.
double quantile(std::span<const double> values, double p);

// Needs at least 4 finite values.
Quartiles quartiles(std::span<const double> values);

inline constexpr double kDefaultIqrFactor = 1.5;

struct AnomalyResult {
  double q1 = 0;
  double q3 = 0;
  double iqr = 0;
  double k = kDefaultIqrFactor;
  double upper_bound = 0;
  std::vector<std::size_t> flagged;  // ascending indices with value > upper_bound
};

AnomalyResult flag_anomalies(std::span<const double> diagonals, double k = kDefaultIqrFactor);

}  // namespace hullsight

#pragma once

// JSON documents written by the command-line tool. Field layouts are pinned
// by the schemas under schemas/.

#include <optional>
#include <span>

#include "json.hpp"

#include "hullsight/box_analytics.hpp"
#include "hullsight/detection.hpp"
#include "hullsight/quality.hpp"
#include "hullsight/train.hpp"

namespace hullsight {

using Json = nlohmann::ordered_json;

Json to_json(const BBox& box);
Json to_json(const MetricReport& m);
Json to_json(const EvalReport& r);
Json to_json(const EpochLog& log);

Json measurement_report(std::span<const Detection> dets, const std::optional<CalibrationScale>& scale);
Json anomaly_report(std::span<const Detection> dets, const AnomalyResult& result);

}  // namespace hullsight

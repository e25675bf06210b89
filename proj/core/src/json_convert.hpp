#pragma once

#include "gridstress/report_io.hpp"

#include <json.hpp>

namespace gridstress::detail {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json_value(const StressReport& report);
ordered_json to_json_value(const SwitchingRecommendation& rec);
StressReport stress_report_from_json_value(const nlohmann::json& doc);

}  // namespace gridstress::detail

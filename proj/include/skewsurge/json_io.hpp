#pragma once

#include <json.hpp>

#include "skewsurge/core_data.hpp"
#include "skewsurge/empirical_body.hpp"
#include "skewsurge/extremal_index.hpp"
#include "skewsurge/gpd_tail.hpp"
#include "skewsurge/inference.hpp"
#include "skewsurge/return_levels.hpp"

namespace skewsurge {

using Json = nlohmann::ordered_json;

// Non-finite numbers are written as null and read back as NaN.
Json number_or_null(double v);
double number_or_nan(const Json& j);

Json to_json(const MonthlyThresholds& t);
MonthlyThresholds thresholds_from_json(const Json& j);

Json to_json(const TideStandardizers& s);
TideStandardizers standardizers_from_json(const Json& j);

Json to_json(const RateParams& rp);
RateParams rate_params_from_json(const Json& j);
Json to_json(const ScaleParams& sp);
ScaleParams scale_params_from_json(const Json& j);
Json to_json(const TailParams& tp);
TailParams tail_params_from_json(const Json& j);

Json to_json(const Scores& s);
Json to_json(const ParamEstimate& e);
Json to_json(const FitResult& fr);
Json to_json(const PooledResult& pr);

Json to_json(const ExiModel& m);
ExiModel exi_from_json(const Json& j);

Json to_json(const TideBandedEmpirical& body);
TideBandedEmpirical empirical_from_json(const Json& j);

Json to_json(const ReturnCurve& curve);

/// Record counts, time coverage and thresholds.
Json series_summary(const SiteSeries& series, const MonthlyThresholds& thresholds);

}  // namespace skewsurge

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "xai/error.hpp"

namespace xai {

struct TimeseriesWindow {
    std::vector<std::int64_t> timestamps;  // epoch seconds, strictly increasing
    std::vector<double> values;
    std::string name;

    std::size_t size() const { return values.size(); }
    bool operator==(const TimeseriesWindow&) const = default;
};

TimeseriesWindow make_timeseries(std::vector<std::int64_t> timestamps,
                                 std::vector<double> values, std::string name = "series");

nlohmann::json timeseries_to_json(const TimeseriesWindow& w);
TimeseriesWindow timeseries_from_json(const nlohmann::json& j);

// Series CSV: two columns timestamp,value with a header line.
TimeseriesWindow timeseries_from_csv(const std::string& text, const std::string& name = "series");

}  // namespace xai

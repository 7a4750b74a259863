#include "xai/timeseries.hpp"

#include <cmath>

#include "xai/tabular.hpp"

namespace xai {

TimeseriesWindow make_timeseries(std::vector<std::int64_t> timestamps,
                                 std::vector<double> values, std::string name) {
    if (timestamps.size() != values.size())
        throw data_error("timeseries: " + std::to_string(timestamps.size()) + " timestamps vs " +
                         std::to_string(values.size()) + " values");
    if (timestamps.empty()) throw data_error("timeseries: empty");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
        if (timestamps[i] <= timestamps[i - 1])
            throw data_error("timeseries: timestamps not strictly increasing at index " +
                             std::to_string(i));
    for (double v : values)
        if (!std::isfinite(v)) throw data_error("timeseries: non-finite value");
    return TimeseriesWindow{std::move(timestamps), std::move(values), std::move(name)};
}

nlohmann::json timeseries_to_json(const TimeseriesWindow& w) {
    nlohmann::json j;
    j["name"] = w.name;
    j["timestamps"] = w.timestamps;
    j["values"] = w.values;
    return j;
}

TimeseriesWindow timeseries_from_json(const nlohmann::json& j) {
    return make_timeseries(j.at("timestamps").get<std::vector<std::int64_t>>(),
                           j.at("values").get<std::vector<double>>(),
                           j.value("name", std::string("series")));
}

TimeseriesWindow timeseries_from_csv(const std::string& text, const std::string& name) {
    auto rows = parse_csv(text);
    if (rows.size() < 2) throw data_error("series csv: need a header and at least one row");
    std::vector<std::int64_t> ts;
    std::vector<double> vals;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < 2)
            throw data_error("series csv: row " + std::to_string(r) + " needs timestamp,value");
        auto t = parse_real(rows[r][0]);
        auto v = parse_real(rows[r][1]);
        if (!t || !v) throw data_error("series csv: non-numeric cell at row " + std::to_string(r));
        ts.push_back(static_cast<std::int64_t>(*t));
        vals.push_back(*v);
    }
    return make_timeseries(std::move(ts), std::move(vals), name);
}

}  // namespace xai

#pragma once

#include <functional>
#include <vector>

#include <json.hpp>

#include "xai/model.hpp"
#include "xai/timeseries.hpp"

namespace xai {

struct TimeseriesAttribution {
    TimeseriesWindow window;
    std::vector<std::pair<std::size_t, std::size_t>> segments;  // [begin, end) index ranges
    std::vector<double> scores;      // per-segment Shapley value
    std::vector<double> reference;   // values used for absent segments
    double base_score = 0.0;         // score of the all-reference window
};

struct TimeseriesCF {
    TimeseriesWindow original;
    TimeseriesWindow modified;
    std::vector<std::size_t> modified_indices;
    double score_before = 0.0;
    double score_after = 0.0;
    bool valid = false;  // no longer anomalous
    bool found = true;
};

using ScoreFunction = std::function<double(const TimeseriesWindow&)>;

struct TsShapConfig {
    std::size_t n_segments = 8;
    std::size_t sampled_permutations = 200;  // used when n_segments > 10
    std::uint64_t seed = 0;
};

struct TsCfConfig {
    std::size_t n_segments = 8;
    double max_modified_fraction = 0.5;
    std::uint64_t seed = 0;
};

// Splits [0, n) into n_segments equal contiguous ranges; the remainder is
// spread left to right.
std::vector<std::pair<std::size_t, std::size_t>> segment_window(std::size_t n,
                                                                std::size_t n_segments);

// Shapley attribution over contiguous segments: a coalition keeps its
// segments' original values and replaces the rest with the reference.
// Exact enumeration for <= 10 segments, sampled permutations otherwise.
TimeseriesAttribution ts_shap(const ScoreFunction& score, const TimeseriesWindow& window,
                              const std::vector<double>& reference, const TsShapConfig& config);

// Reference broadcast from a constant (e.g. the detector's train mean).
TimeseriesAttribution ts_shap(const ScoreFunction& score, const TimeseriesWindow& window,
                              double reference_constant, const TsShapConfig& config);

// Greedy segment replacement until the window passes re-detection, then
// pointwise pruning that restores points whose restoration stays valid.
TimeseriesCF ts_counterfactual(const ThresholdDetector& d, const TimeseriesWindow& window,
                               const std::vector<double>& reference, const TsCfConfig& config);

nlohmann::json ts_attribution_to_json(const TimeseriesAttribution& a);
nlohmann::json ts_cf_to_json(const TimeseriesCF& cf);

}  // namespace xai

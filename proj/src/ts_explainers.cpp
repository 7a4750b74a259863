#include "xai/ts_explainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xai/parallel.hpp"
#include "xai/rng.hpp"

namespace xai {

std::vector<std::pair<std::size_t, std::size_t>> segment_window(std::size_t n,
                                                                std::size_t n_segments) {
    if (n_segments == 0 || n == 0)
        throw data_error("segment_window: need a non-empty window and at least one segment");
    n_segments = std::min(n_segments, n);  // never hand out empty segments
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    const std::size_t base = n / n_segments;
    const std::size_t remainder = n % n_segments;
    std::size_t pos = 0;
    for (std::size_t s = 0; s < n_segments; ++s) {
        const std::size_t len = base + (s < remainder ? 1 : 0);
        segments.emplace_back(pos, pos + len);
        pos += len;
    }
    return segments;
}

namespace {

TimeseriesWindow blend(const TimeseriesWindow& window, const std::vector<double>& reference,
                       const std::vector<std::pair<std::size_t, std::size_t>>& segments,
                       std::uint64_t present_mask) {
    TimeseriesWindow out = window;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (present_mask & (1ull << s)) continue;
        for (std::size_t i = segments[s].first; i < segments[s].second; ++i)
            out.values[i] = reference[i];
    }
    return out;
}

double factorial(std::size_t n) {
    double f = 1.0;
    for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

}  // namespace

TimeseriesAttribution ts_shap(const ScoreFunction& score, const TimeseriesWindow& window,
                              const std::vector<double>& reference, const TsShapConfig& config) {
    const std::size_t n = window.size();
    const std::size_t S = config.n_segments;
    if (S > n) throw data_error("ts_shap: more segments than points");
    if (reference.size() != n) throw data_error("ts_shap: reference length mismatch");

    TimeseriesAttribution res;
    res.window = window;
    res.reference = reference;
    res.segments = segment_window(n, S);
    res.scores.assign(S, 0.0);

    if (S <= 10) {
        // exact: cache all 2^S coalition scores, then the Shapley sum
        const std::size_t count = 1ull << S;
        std::vector<double> v(count, 0.0);
        parallel_for(count, [&](std::size_t mask) {
            v[mask] = score(blend(window, reference, res.segments, mask));
        });
        res.base_score = v[0];
        const double s_fact = factorial(S);
        for (std::size_t j = 0; j < S; ++j) {
            double phi = 0.0;
            for (std::size_t mask = 0; mask < count; ++mask) {
                if (mask & (1ull << j)) continue;
                std::size_t t = 0;
                for (std::size_t b = 0; b < S; ++b)
                    if (mask & (1ull << b)) ++t;
                const double weight =
                    factorial(t) * factorial(S - t - 1) / s_fact;
                phi += weight * (v[mask | (1ull << j)] - v[mask]);
            }
            res.scores[j] = phi;
        }
    } else {
        res.base_score = score(blend(window, reference, res.segments, 0));
        Rng rng(config.seed);
        std::vector<std::size_t> order(S);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t p = 0; p < config.sampled_permutations; ++p) {
            rng.shuffle(order);
            std::uint64_t mask = 0;
            double prev = res.base_score;
            for (std::size_t j : order) {
                mask |= 1ull << j;
                const double cur = score(blend(window, reference, res.segments, mask));
                res.scores[j] += cur - prev;
                prev = cur;
            }
        }
        for (double& s : res.scores) s /= static_cast<double>(config.sampled_permutations);
    }
    return res;
}

TimeseriesAttribution ts_shap(const ScoreFunction& score, const TimeseriesWindow& window,
                              double reference_constant, const TsShapConfig& config) {
    return ts_shap(score, window, std::vector<double>(window.size(), reference_constant), config);
}

TimeseriesCF ts_counterfactual(const ThresholdDetector& d, const TimeseriesWindow& window,
                               const std::vector<double>& reference, const TsCfConfig& config) {
    if (reference.size() != window.size())
        throw data_error("ts_counterfactual: reference length mismatch");
    const auto before = detect(d, window);
    if (!before.is_anomaly)
        throw data_error("ts_counterfactual: window is not anomalous");

    TimeseriesCF cf;
    cf.original = window;
    cf.modified = window;
    cf.score_before = before.score;

    const auto segments = segment_window(window.size(), std::min(config.n_segments, window.size()));
    const auto max_modified =
        static_cast<std::size_t>(config.max_modified_fraction * static_cast<double>(window.size()));

    std::vector<bool> replaced(segments.size(), false);
    std::size_t modified_points = 0;
    double best_score = before.score;

    while (true) {
        const auto cur = detect(d, cf.modified);
        best_score = std::min(best_score, cur.score);
        if (!cur.is_anomaly) break;
        // replace the segment whose substitution most reduces the score
        std::size_t best_seg = segments.size();
        double best_seg_score = cur.score;
        for (std::size_t s = 0; s < segments.size(); ++s) {
            if (replaced[s]) continue;
            const std::size_t len = segments[s].second - segments[s].first;
            if (modified_points + len > max_modified) continue;
            TimeseriesWindow trial = cf.modified;
            for (std::size_t i = segments[s].first; i < segments[s].second; ++i)
                trial.values[i] = reference[i];
            const double sc = detect(d, trial).score;
            if (sc < best_seg_score) { best_seg_score = sc; best_seg = s; }
        }
        if (best_seg == segments.size()) {  // no affordable improving replacement
            cf.found = false;
            cf.score_after = best_score;
            cf.valid = false;
            return cf;
        }
        replaced[best_seg] = true;
        for (std::size_t i = segments[best_seg].first; i < segments[best_seg].second; ++i)
            cf.modified.values[i] = reference[i];
        modified_points += segments[best_seg].second - segments[best_seg].first;
    }

    // pointwise pruning: restore any replaced point that keeps validity
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (!replaced[s]) continue;
        for (std::size_t i = segments[s].first; i < segments[s].second; ++i) {
            if (cf.modified.values[i] == window.values[i]) continue;
            const double saved = cf.modified.values[i];
            cf.modified.values[i] = window.values[i];
            if (detect(d, cf.modified).is_anomaly) cf.modified.values[i] = saved;
        }
    }

    for (std::size_t i = 0; i < window.size(); ++i)
        if (cf.modified.values[i] != window.values[i]) cf.modified_indices.push_back(i);
    const auto after = detect(d, cf.modified);
    cf.score_after = after.score;
    cf.valid = !after.is_anomaly;
    cf.found = true;
    return cf;
}

nlohmann::json ts_attribution_to_json(const TimeseriesAttribution& a) {
    nlohmann::json j;
    j["explainer"] = "ts-shap";
    j["timestamps"] = a.window.timestamps;
    j["values"] = a.window.values;
    j["reference"] = a.reference;
    nlohmann::json segs = nlohmann::json::array();
    for (std::size_t s = 0; s < a.segments.size(); ++s)
        segs.push_back(nlohmann::json{{"begin", a.segments[s].first},
                                      {"end", a.segments[s].second},
                                      {"score", a.scores[s]}});
    j["segments"] = segs;
    j["base_score"] = a.base_score;
    return j;
}

nlohmann::json ts_cf_to_json(const TimeseriesCF& cf) {
    nlohmann::json j;
    j["explainer"] = "ts-ce";
    j["timestamps"] = cf.original.timestamps;
    j["original"] = cf.original.values;
    j["modified"] = cf.modified.values;
    j["modified_indices"] = cf.modified_indices;
    j["score_before"] = cf.score_before;
    j["score_after"] = cf.score_after;
    j["valid"] = cf.valid;
    j["found"] = cf.found;
    return j;
}

}  // namespace xai

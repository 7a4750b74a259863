#include <doctest.h>

#include <cmath>

#include "xai/ts_explainers.hpp"

using namespace xai;

namespace {

TimeseriesWindow window_of(const std::vector<double>& values) {
    std::vector<std::int64_t> ts(values.size());
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = static_cast<std::int64_t>(i);
    return make_timeseries(ts, values);
}

// Brute-force Shapley over segment coalitions.
std::vector<double> brute_force_segment_shapley(
    const ScoreFunction& score, const TimeseriesWindow& window,
    const std::vector<double>& reference,
    const std::vector<std::pair<std::size_t, std::size_t>>& segments) {
    const std::size_t S = segments.size();
    auto value = [&](unsigned mask) {
        TimeseriesWindow w = window;
        w.values = reference;
        for (std::size_t s = 0; s < S; ++s)
            if (mask & (1u << s))
                for (std::size_t i = segments[s].first; i < segments[s].second; ++i)
                    w.values[i] = window.values[i];
        return score(w);
    };
    std::vector<double> fact(S + 1, 1.0);
    for (std::size_t i = 1; i <= S; ++i) fact[i] = fact[i - 1] * double(i);
    std::vector<double> phi(S, 0.0);
    for (unsigned mask = 0; mask < (1u << S); ++mask) {
        const auto k = static_cast<std::size_t>(__builtin_popcount(mask));
        const double v = value(mask);
        for (std::size_t s = 0; s < S; ++s) {
            if (mask & (1u << s)) continue;
            phi[s] += fact[k] * fact[S - k - 1] / fact[S] * (value(mask | (1u << s)) - v);
        }
    }
    return phi;
}

}  // namespace

TEST_CASE("segment_window splits evenly with the remainder left to right") {
    const auto segs = segment_window(10, 4);
    REQUIRE(segs.size() == 4);
    CHECK(segs[0] == std::pair<std::size_t, std::size_t>{0, 3});
    CHECK(segs[1] == std::pair<std::size_t, std::size_t>{3, 6});
    CHECK(segs[2] == std::pair<std::size_t, std::size_t>{6, 8});
    CHECK(segs[3] == std::pair<std::size_t, std::size_t>{8, 10});
    const auto one = segment_window(5, 8);  // more segments than points
    for (const auto& [a, b] : one) CHECK(b >= a);
    std::size_t covered = 0;
    for (const auto& [a, b] : one) covered += b - a;
    CHECK(covered == 5);
}

TEST_CASE("ts-shap dummy axiom: ignored segment scores zero") {
    const auto w = window_of({1, 2, 3, 4, 5, 6, 7, 8});
    // score reads only the first half
    const ScoreFunction score = [](const TimeseriesWindow& win) {
        double s = 0;
        for (std::size_t i = 0; i < win.size() / 2; ++i) s += win.values[i];
        return s;
    };
    TsShapConfig cfg;
    cfg.n_segments = 4;
    const auto r = ts_shap(score, w, 0.0, cfg);
    CHECK(std::fabs(r.scores[2]) <= 1e-9);
    CHECK(std::fabs(r.scores[3]) <= 1e-9);
}

TEST_CASE("ts-shap single-index score attributes everything to its segment") {
    const auto w = window_of({1, 2, 3, 4, 5, 6, 7, 8});
    const ScoreFunction score = [](const TimeseriesWindow& win) { return win.values[5]; };
    TsShapConfig cfg;
    cfg.n_segments = 4;
    const auto r = ts_shap(score, w, 0.0, cfg);
    for (std::size_t s = 0; s < 4; ++s) {
        if (s == 2)  // indices {4,5}
            CHECK(r.scores[s] == doctest::Approx(6.0));
        else
            CHECK(std::fabs(r.scores[s]) <= 1e-9);
    }
}

TEST_CASE("ts-shap exact mode matches the coalition oracle") {
    std::vector<double> values(16, 0.0);
    values[9] = 7.0;  // spike
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += 0.1 * double(i % 3);
    const auto w = window_of(values);
    const auto d = ThresholdDetector{0.0, 1.0, 3.0};
    const ScoreFunction score = [&](const TimeseriesWindow& win) {
        return detect(d, win).score;
    };
    TsShapConfig cfg;
    cfg.n_segments = 4;
    const auto r = ts_shap(score, w, 0.0, cfg);
    const auto oracle =
        brute_force_segment_shapley(score, w, std::vector<double>(16, 0.0), r.segments);
    REQUIRE(r.scores.size() == oracle.size());
    for (std::size_t s = 0; s < oracle.size(); ++s)
        CHECK(std::fabs(r.scores[s] - oracle[s]) <= 1e-9);
    // the spike's segment carries the largest |phi|
    std::size_t best = 0;
    for (std::size_t s = 1; s < r.scores.size(); ++s)
        if (std::fabs(r.scores[s]) > std::fabs(r.scores[best])) best = s;
    CHECK(r.segments[best].first <= 9);
    CHECK(r.segments[best].second > 9);
}

TEST_CASE("ts-shap efficiency: scores sum to score(x) - score(reference)") {
    const auto w = window_of({2, -1, 4, 0, 3, 3, -2, 1});
    const ScoreFunction score = [](const TimeseriesWindow& win) {
        double m = 0;
        for (double v : win.values) m = std::max(m, std::fabs(v));
        return m;
    };
    TsShapConfig cfg;
    cfg.n_segments = 4;
    const auto r = ts_shap(score, w, 0.5, cfg);
    double total = r.base_score;
    for (double s : r.scores) total += s;
    CHECK(total == doctest::Approx(score(w)).epsilon(1e-9));
}

TEST_CASE("ts-shap sampled mode approximates the exact values") {
    std::vector<double> values(24);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::sin(double(i));
    values[7] = 6.0;
    const auto w = window_of(values);
    const ScoreFunction score = [](const TimeseriesWindow& win) {
        double m = 0;
        for (double v : win.values) m = std::max(m, std::fabs(v));
        return m;
    };
    TsShapConfig exact_cfg;
    exact_cfg.n_segments = 12;  // > 10 forces sampling
    exact_cfg.seed = 5;
    const auto sampled = ts_shap(score, w, 0.0, exact_cfg);
    const auto oracle = brute_force_segment_shapley(score, w, std::vector<double>(24, 0.0),
                                                    sampled.segments);
    for (std::size_t s = 0; s < oracle.size(); ++s)
        CHECK(std::fabs(sampled.scores[s] - oracle[s]) <= 0.35);
    // determinism under the seed
    const auto again = ts_shap(score, w, 0.0, exact_cfg);
    CHECK(again.scores == sampled.scores);
}

TEST_CASE("ts counterfactual repairs a single spike minimally") {
    const auto train = window_of({1, -1, 1, -1, 1, -1, 1, -1});
    const auto d = fit_detector(train, 3.0);
    std::vector<double> values(16, 0.0);
    values[6] = 9.0;
    const auto w = window_of(values);
    REQUIRE(detect(d, w).is_anomaly);
    const auto r = ts_counterfactual(d, w, std::vector<double>(16, d.train_mean), TsCfConfig{});
    REQUIRE(r.found);
    CHECK(r.valid);
    CHECK(r.modified_indices == std::vector<std::size_t>{6});
    CHECK_FALSE(detect(d, r.modified).is_anomaly);
    CHECK(r.score_after <= 3.0);
    CHECK(r.score_before == doctest::Approx(9.0));
}

TEST_CASE("ts counterfactual requires an anomalous window") {
    const auto train = window_of({1, -1, 1, -1});
    const auto d = fit_detector(train, 3.0);
    const auto w = window_of({0.5, -0.5, 0.5, -0.5});
    CHECK_THROWS_AS(
        (void)ts_counterfactual(d, w, std::vector<double>(4, d.train_mean), TsCfConfig{}), Error);
}

TEST_CASE("ts counterfactual with reference equal to the window reports not found") {
    const auto train = window_of({1, -1, 1, -1});
    const auto d = fit_detector(train, 3.0);
    std::vector<double> values = {0, 0, 8, 0};
    const auto w = window_of(values);
    const auto r = ts_counterfactual(d, w, values, TsCfConfig{});
    CHECK_FALSE(r.found);
}

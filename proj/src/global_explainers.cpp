#include "xai/global_explainers.hpp"

#include <algorithm>
#include <cmath>

#include "xai/parallel.hpp"
#include "xai/rng.hpp"

namespace xai {

namespace {

std::vector<double> column_values(const FittedTransform& ft, const TabularBatch& batch,
                                  const std::string& feature) {
    const auto idx = batch.schema.column_index(feature);
    if (!idx) throw data_error("unknown feature '" + feature + "'");
    std::vector<double> values;
    for (std::size_t r = 0; r < batch.n_rows(); ++r) {
        const Cell& c = batch.cell(r, *idx);
        if (!cell_is_missing(c) && std::holds_alternative<double>(c))
            values.push_back(std::get<double>(c));
        else if (cell_is_missing(c)) {
            const auto fc = ft.schema.column_index(feature);
            if (fc) values.push_back(ft.columns[*fc].fill_value);
        }
    }
    return values;
}

double quantile_of(std::vector<double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

PDPResult pdp(const TabularPredictor& predictor, const TabularBatch& background,
              const std::string& feature, std::size_t grid_size, std::size_t ice_retained) {
    if (background.n_rows() == 0) throw data_error("pdp: empty background");
    const FittedTransform& ft = *predictor.transform;
    const auto col = ft.schema.column_index(feature);
    if (!col) throw data_error("pdp: unknown feature '" + feature + "'");

    PDPResult res;
    res.feature = feature;
    const auto& column = ft.schema.columns[*col];
    if (column.kind == ColumnKind::Categorical) {
        for (const auto& cat : column.categories) res.grid.emplace_back(cat);
    } else {
        auto values = column_values(ft, background, feature);
        std::sort(values.begin(), values.end());
        std::vector<double> grid;
        for (std::size_t g = 0; g < grid_size; ++g) {
            const double q = grid_size == 1 ? 0.5
                                            : static_cast<double>(g) /
                                                  static_cast<double>(grid_size - 1);
            const double v = quantile_of(values, q);
            if (grid.empty() || v > grid.back()) grid.push_back(v);
        }
        for (double v : grid) res.grid.emplace_back(v);
    }

    const auto base_rows = feature_rows(ft, background);
    const std::size_t k = predictor.model->n_outputs;
    res.means.assign(res.grid.size(), std::vector<double>(k, 0.0));
    res.ice_retained = std::min(ice_retained, background.n_rows());
    res.ice.assign(res.ice_retained,
                   std::vector<std::vector<double>>(res.grid.size(), std::vector<double>(k, 0.0)));

    // grid points are independent; means are written to disjoint slots
    parallel_for(res.grid.size(), [&](std::size_t g) {
        auto rows = base_rows;
        for (auto& row : rows) row[*col] = res.grid[g];
        const Matrix out = predictor.predict_rows(rows);
        for (std::size_t r = 0; r < out.rows; ++r)
            for (std::size_t j = 0; j < k; ++j) {
                res.means[g][j] += out.at(r, j);
                if (r < res.ice_retained) res.ice[r][g][j] = out.at(r, j);
            }
        for (std::size_t j = 0; j < k; ++j)
            res.means[g][j] /= static_cast<double>(out.rows);
    });
    return res;
}

ALEResult ale(const TabularPredictor& predictor, const TabularBatch& background,
              const std::string& feature, std::size_t n_bins) {
    const FittedTransform& ft = *predictor.transform;
    const auto col = ft.schema.column_index(feature);
    if (!col) throw data_error("ale: unknown feature '" + feature + "'");
    if (ft.schema.columns[*col].kind != ColumnKind::Categorical) {
        // ok
    } else {
        throw data_error("ale: feature '" + feature + "' is categorical (unsupported)");
    }

    auto values = column_values(ft, background, feature);
    std::sort(values.begin(), values.end());
    std::size_t distinct = values.empty() ? 0 : 1;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[i - 1]) ++distinct;
    if (distinct < n_bins)
        throw data_error("ale: feature '" + feature + "' has " + std::to_string(distinct) +
                         " distinct values, need >= " + std::to_string(n_bins));

    ALEResult res;
    res.feature = feature;
    res.edges.push_back(values.front());
    for (std::size_t b = 1; b <= n_bins; ++b) {
        const double e = quantile_of(values, static_cast<double>(b) / static_cast<double>(n_bins));
        if (e > res.edges.back()) res.edges.push_back(e);
    }
    const std::size_t bins = res.edges.size() - 1;

    // assign background rows to bins
    const auto base_rows = feature_rows(ft, background);
    std::vector<std::vector<std::size_t>> members(bins);
    for (std::size_t r = 0; r < background.n_rows(); ++r) {
        const Cell& c = base_rows[r][*col];
        const double v = cell_is_missing(c) ? ft.columns[*col].fill_value : std::get<double>(c);
        auto it = std::upper_bound(res.edges.begin(), res.edges.end(), v);
        std::size_t b = it == res.edges.begin()
                            ? 0
                            : static_cast<std::size_t>(it - res.edges.begin()) - 1;
        b = std::min(b, bins - 1);
        members[b].push_back(r);
    }

    const std::size_t k = predictor.model->n_outputs;
    std::vector<std::vector<double>> local(bins, std::vector<double>(k, 0.0));
    parallel_for(bins, [&](std::size_t b) {
        if (members[b].empty()) return;
        std::vector<std::vector<Cell>> lo_rows, hi_rows;
        for (auto r : members[b]) {
            auto row = base_rows[r];
            row[*col] = res.edges[b];
            lo_rows.push_back(row);
            row[*col] = res.edges[b + 1];
            hi_rows.push_back(std::move(row));
        }
        const Matrix lo = predictor.predict_rows(lo_rows);
        const Matrix hi = predictor.predict_rows(hi_rows);
        for (std::size_t i = 0; i < lo.rows; ++i)
            for (std::size_t j = 0; j < k; ++j) local[b][j] += hi.at(i, j) - lo.at(i, j);
        for (std::size_t j = 0; j < k; ++j)
            local[b][j] /= static_cast<double>(members[b].size());
    });

    res.effects.assign(res.edges.size(), std::vector<double>(k, 0.0));
    for (std::size_t b = 0; b < bins; ++b) {
        res.bin_counts.push_back(members[b].size());
        for (std::size_t j = 0; j < k; ++j)
            res.effects[b + 1][j] = res.effects[b][j] + local[b][j];
    }
    // center: dataset-weighted mean of per-bin midpoints is zero
    const double n = static_cast<double>(background.n_rows());
    for (std::size_t j = 0; j < k; ++j) {
        double mean = 0.0;
        for (std::size_t b = 0; b < bins; ++b)
            mean += static_cast<double>(members[b].size()) * 0.5 *
                    (res.effects[b][j] + res.effects[b + 1][j]);
        mean /= n;
        for (auto& e : res.effects) e[j] -= mean;
    }
    return res;
}

SensitivityResult morris(const ModelHandle& model,
                         const std::vector<std::string>& feature_names,
                         const std::vector<std::pair<double, double>>& bounds,
                         std::size_t r_trajectories, int p_levels, std::uint64_t seed,
                         std::size_t output_index) {
    const std::size_t d = bounds.size();
    if (d == 0) throw data_error("morris: no features");
    if (r_trajectories < 1) throw data_error("morris: r must be >= 1");
    if (p_levels < 2 || p_levels % 2 != 0) throw data_error("morris: p must be even and >= 2");

    const double delta = static_cast<double>(p_levels) / (2.0 * (p_levels - 1));
    Rng rng(seed);
    std::vector<std::vector<double>> effects(d);

    for (std::size_t t = 0; t < r_trajectories; ++t) {
        // base point: levels in {0,...,p/2-1}/(p-1) so every +delta step stays in [0,1]
        std::vector<double> unit(d);
        for (std::size_t j = 0; j < d; ++j)
            unit[j] = static_cast<double>(rng.index(static_cast<std::size_t>(p_levels / 2))) /
                      (p_levels - 1);
        std::vector<std::size_t> order(d);
        for (std::size_t j = 0; j < d; ++j) order[j] = j;
        rng.shuffle(order);

        // evaluate the whole trajectory in one batched predict
        Matrix points(d + 1, d);
        auto write_point = [&](std::size_t row) {
            for (std::size_t j = 0; j < d; ++j)
                points.at(row, j) = bounds[j].first + unit[j] * (bounds[j].second - bounds[j].first);
        };
        write_point(0);
        for (std::size_t s = 0; s < d; ++s) {
            unit[order[s]] += delta;
            write_point(s + 1);
        }
        const Matrix out = model.predict(points);
        for (std::size_t s = 0; s < d; ++s) {
            const double ee = (out.at(s + 1, output_index) - out.at(s, output_index)) / delta;
            effects[order[s]].push_back(ee);
        }
    }

    SensitivityResult res;
    res.features = feature_names;
    res.trajectories = r_trajectories;
    res.levels = p_levels;
    for (std::size_t j = 0; j < d; ++j) {
        const auto& e = effects[j];
        double mu = 0.0, mu_star = 0.0;
        for (double v : e) { mu += v; mu_star += std::fabs(v); }
        mu /= static_cast<double>(e.size());
        mu_star /= static_cast<double>(e.size());
        double var = 0.0;
        for (double v : e) var += (v - mu) * (v - mu);
        res.mu.push_back(mu);
        res.mu_star.push_back(mu_star);
        res.sigma.push_back(std::sqrt(var / static_cast<double>(e.size())));
    }
    return res;
}

nlohmann::json pdp_to_json(const PDPResult& r) {
    nlohmann::json j;
    j["explainer"] = "pdp";
    j["feature"] = r.feature;
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& g : r.grid) {
        if (std::holds_alternative<double>(g)) grid.push_back(std::get<double>(g));
        else grid.push_back(cell_to_string(g));
    }
    j["grid"] = grid;
    j["means"] = r.means;
    j["ice_retained"] = r.ice_retained;
    if (r.ice_retained > 0) j["ice"] = r.ice;
    return j;
}

nlohmann::json ale_to_json(const ALEResult& r) {
    nlohmann::json j;
    j["explainer"] = "ale";
    j["feature"] = r.feature;
    j["edges"] = r.edges;
    j["effects"] = r.effects;
    j["bin_counts"] = r.bin_counts;
    return j;
}

nlohmann::json sensitivity_to_json(const SensitivityResult& r) {
    nlohmann::json j;
    j["explainer"] = "morris";
    j["features"] = r.features;
    j["mu"] = r.mu;
    j["mu_star"] = r.mu_star;
    j["sigma"] = r.sigma;
    j["trajectories"] = r.trajectories;
    j["levels"] = r.levels;
    return j;
}

}  // namespace xai

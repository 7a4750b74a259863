#include "xai/local_attribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xai/linalg.hpp"
#include "xai/parallel.hpp"
#include "xai/rng.hpp"

namespace xai {

namespace {

std::vector<std::string> source_feature_names(const FittedTransform& ft) {
    std::vector<std::string> names;
    for (const auto& c : ft.schema.columns) names.push_back(c.name);
    return names;
}

// Sums per-transformed-column scores into source-feature space.
std::vector<double> fold_to_source(const FittedTransform& ft, const std::vector<double>& scores) {
    std::vector<double> out(ft.schema.n_columns(), 0.0);
    for (std::size_t i = 0; i < ft.layout.size(); ++i) out[ft.layout[i].first] += scores[i];
    return out;
}

std::string transformed_feature_name(const FittedTransform& ft, std::size_t transformed_col) {
    const auto [src, slot] = ft.layout[transformed_col];
    const auto& fc = ft.columns[src];
    if (fc.kind == ColumnKind::Categorical &&
        fc.directive.categorical == CategoricalEncoding::OneHot)
        return fc.name + "=" + fc.categories[slot];
    return fc.name;
}

// Quartile bin index of a value given interior edges.
std::size_t bin_of(const std::vector<double>& edges, double v) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    return static_cast<std::size_t>(it - edges.begin());
}

void truncate_top_k(std::vector<double>& scores, std::size_t top_k) {
    if (top_k >= scores.size()) return;
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(scores[a]) > std::fabs(scores[b]);
    });
    std::vector<double> kept(scores.size(), 0.0);
    for (std::size_t i = 0; i < top_k; ++i) kept[order[i]] = scores[order[i]];
    scores = std::move(kept);
}

}  // namespace

FeatureAttribution lime_explain(const TabularPredictor& predictor, const TabularBatch& train,
                                const std::vector<Cell>& instance, std::size_t output_index,
                                std::size_t n_samples, std::size_t top_k, std::uint64_t seed) {
    const FittedTransform& ft = *predictor.transform;
    const std::size_t d = ft.schema.n_columns();
    if (n_samples < d + 2)
        throw data_error("lime: n_samples " + std::to_string(n_samples) +
                         " underdetermines " + std::to_string(d) + " features");

    const auto train_rows = feature_rows(ft, train);
    const std::size_t n_train = train_rows.size();

    // quartile edges per continuous feature (from train), category index otherwise
    std::vector<std::vector<double>> edges(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (ft.schema.columns[j].kind != ColumnKind::Continuous) continue;
        std::vector<double> values;
        for (const auto& row : train_rows)
            if (!cell_is_missing(row[j])) values.push_back(std::get<double>(row[j]));
        std::sort(values.begin(), values.end());
        for (double q : {0.25, 0.5, 0.75}) {
            const double pos = q * static_cast<double>(values.size() - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const double frac = pos - static_cast<double>(lo);
            const double e = values[lo] * (1.0 - frac) +
                             values[std::min(lo + 1, values.size() - 1)] * frac;
            if (edges[j].empty() || e > edges[j].back()) edges[j].push_back(e);
        }
    }

    auto region_of = [&](std::size_t j, const Cell& c) -> std::size_t {
        const auto& col = ft.schema.columns[j];
        if (col.kind == ColumnKind::Continuous) {
            const double v = cell_is_missing(c) ? ft.columns[j].fill_value : std::get<double>(c);
            return bin_of(edges[j], v);
        }
        if (cell_is_missing(c)) return col.categories.size();
        const auto& label = std::get<std::string>(c);
        const auto it = std::find(col.categories.begin(), col.categories.end(), label);
        return static_cast<std::size_t>(it - col.categories.begin());
    };

    std::vector<std::size_t> instance_region(d);
    for (std::size_t j = 0; j < d; ++j) instance_region[j] = region_of(j, instance[j]);

    Rng rng(seed);
    Matrix z(n_samples, d);
    std::vector<std::vector<Cell>> perturbed(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        perturbed[s].resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            const Cell& v = train_rows[rng.index(n_train)][j];
            perturbed[s][j] = v;
            z.at(s, j) = region_of(j, v) == instance_region[j] ? 1.0 : 0.0;
        }
    }

    const Matrix out = predictor.predict_rows(perturbed);
    std::vector<double> y(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) y[s] = out.at(s, output_index);

    const double sigma = 0.75 * std::sqrt(static_cast<double>(d));
    std::vector<double> w(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        double hamming = 0.0;
        for (std::size_t j = 0; j < d; ++j) hamming += 1.0 - z.at(s, j);
        w[s] = std::exp(-(hamming * hamming) / (sigma * sigma));
    }

    auto [intercept, beta] = weighted_ridge(z, y, w, 1.0);
    truncate_top_k(beta, top_k);

    FeatureAttribution a;
    a.explainer = "lime";
    a.output_index = output_index;
    a.feature_names = source_feature_names(ft);
    a.feature_values = instance;
    a.scores = std::move(beta);
    a.base_value = intercept;
    return a;
}

// ---------------------------------------------------------------------------
// KernelSHAP

namespace {

double shapley_kernel_weight(std::size_t d, std::size_t s) {
    // (d-1) / (C(d,s) * s * (d-s))
    double comb = 1.0;
    for (std::size_t i = 0; i < s; ++i)
        comb = comb * static_cast<double>(d - i) / static_cast<double>(i + 1);
    return static_cast<double>(d - 1) /
           (comb * static_cast<double>(s) * static_cast<double>(d - s));
}

}  // namespace

FeatureAttribution kernel_shap(const TabularPredictor& predictor, const TabularBatch& background,
                               const std::vector<Cell>& instance, std::size_t output_index,
                               std::size_t n_coalitions, std::uint64_t seed) {
    const FittedTransform& ft = *predictor.transform;
    const std::size_t d = ft.schema.n_columns();
    if (d == 0) throw data_error("kernel_shap: no features");
    if (background.n_rows() == 0) throw data_error("kernel_shap: empty background");

    auto bg_rows = feature_rows(ft, background);
    if (bg_rows.size() > 100) bg_rows.resize(100);
    const std::size_t n_bg = bg_rows.size();

    const double fx = predictor.predict_row(instance)[output_index];
    const Matrix bg_out = predictor.predict_rows(bg_rows);
    double base = 0.0;
    for (std::size_t r = 0; r < n_bg; ++r) base += bg_out.at(r, output_index);
    base /= static_cast<double>(n_bg);

    FeatureAttribution a;
    a.explainer = "shap";
    a.output_index = output_index;
    a.feature_names = source_feature_names(ft);
    a.feature_values = instance;
    a.base_value = base;
    a.has_base = true;

    if (d == 1) {
        a.scores = {fx - base};
        return a;
    }

    // choose coalitions (bitmasks over d <= 63 features)
    if (d > 63) throw data_error("kernel_shap: more than 63 features unsupported");
    std::vector<std::uint64_t> coalitions;
    const bool exact = d < 63 && ((1ull << d) - 2) <= n_coalitions;
    if (exact) {
        for (std::uint64_t m = 1; m < (1ull << d) - 1; ++m) coalitions.push_back(m);
    } else {
        // fill whole sizes in descending kernel-weight order, then sample the
        // first size that does not fit completely
        std::vector<std::size_t> sizes;
        for (std::size_t lo = 1, hi = d - 1; lo <= hi; ++lo, --hi) {
            sizes.push_back(lo);
            if (hi != lo) sizes.push_back(hi);
        }
        Rng rng(seed);
        std::size_t budget = n_coalitions;
        for (std::size_t s : sizes) {
            double comb = 1.0;
            for (std::size_t i = 0; i < s; ++i)
                comb = comb * static_cast<double>(d - i) / static_cast<double>(i + 1);
            if (comb <= static_cast<double>(budget)) {
                // enumerate all subsets of size s (Gosper's hack)
                std::uint64_t m = (1ull << s) - 1;
                const std::uint64_t limit = 1ull << d;
                while (m < limit) {
                    coalitions.push_back(m);
                    const std::uint64_t c = m & (~m + 1);
                    const std::uint64_t r = m + c;
                    m = (((r ^ m) >> 2) / c) | r;
                }
                budget -= static_cast<std::size_t>(comb);
            } else {
                std::vector<std::uint64_t> seen;
                while (budget > 0) {
                    // random subset of size s
                    std::uint64_t m = 0;
                    std::size_t placed = 0;
                    while (placed < s) {
                        const std::uint64_t bit = 1ull << rng.index(d);
                        if (!(m & bit)) { m |= bit; ++placed; }
                    }
                    if (std::find(seen.begin(), seen.end(), m) == seen.end()) {
                        seen.push_back(m);
                        coalitions.push_back(m);
                        --budget;
                    }
                    if (seen.size() >= static_cast<std::size_t>(comb)) break;
                }
                break;
            }
            if (budget == 0) break;
        }
    }

    // value function per coalition: mean prediction with absent features
    // drawn from each background row
    std::vector<double> v(coalitions.size(), 0.0);
    parallel_for(coalitions.size(), [&](std::size_t ci) {
        const std::uint64_t mask = coalitions[ci];
        std::vector<std::vector<Cell>> rows = bg_rows;
        for (auto& row : rows)
            for (std::size_t j = 0; j < d; ++j)
                if (mask & (1ull << j)) row[j] = instance[j];
        const Matrix out = predictor.predict_rows(rows);
        double s = 0.0;
        for (std::size_t r = 0; r < out.rows; ++r) s += out.at(r, output_index);
        v[ci] = s / static_cast<double>(out.rows);
    });

    // weighted least squares with the efficiency constraint; the last
    // feature's value is eliminated: phi_d = (fx - base) - sum_{j<d} phi_j
    const std::size_t p = d - 1;
    Matrix ata(p, p);
    std::vector<double> atb(p, 0.0);
    const double total = fx - base;
    for (std::size_t ci = 0; ci < coalitions.size(); ++ci) {
        const std::uint64_t mask = coalitions[ci];
        std::size_t size = 0;
        for (std::size_t j = 0; j < d; ++j)
            if (mask & (1ull << j)) ++size;
        const double w = shapley_kernel_weight(d, size);
        const double zd = (mask & (1ull << (d - 1))) ? 1.0 : 0.0;
        const double t = (v[ci] - base) - zd * total;
        std::vector<double> row(p);
        for (std::size_t j = 0; j < p; ++j)
            row[j] = ((mask & (1ull << j)) ? 1.0 : 0.0) - zd;
        for (std::size_t j = 0; j < p; ++j) {
            if (row[j] == 0.0) continue;
            atb[j] += w * row[j] * t;
            for (std::size_t k2 = 0; k2 < p; ++k2) ata.at(j, k2) += w * row[j] * row[k2];
        }
    }
    std::vector<double> phi(d, 0.0);
    try {
        auto sol = solve_linear(ata, atb);
        for (std::size_t j = 0; j < p; ++j) phi[j] = sol[j];
    } catch (const Error&) {
        // underdetermined sample: fall back to an even split
        for (std::size_t j = 0; j < p; ++j) phi[j] = total / static_cast<double>(d);
    }
    phi[d - 1] = total;
    for (std::size_t j = 0; j < p; ++j) phi[d - 1] -= phi[j];

    a.scores = std::move(phi);
    return a;
}

// ---------------------------------------------------------------------------
// Integrated gradients

FeatureAttribution integrated_gradients(const ModelHandle& model, const FittedTransform& ft,
                                        const std::vector<Cell>& instance,
                                        const std::vector<double>& baseline, std::size_t steps,
                                        std::size_t output_index) {
    if (!model.differentiable)
        throw model_error("integrated_gradients: model is not differentiable; use kernel_shap");
    const auto x = transform_row(ft, instance);
    if (baseline.size() != x.size())
        throw data_error("integrated_gradients: baseline width mismatch");
    if (steps < 1) throw data_error("integrated_gradients: steps must be >= 1");

    std::vector<double> avg_grad(x.size(), 0.0);
    for (std::size_t i = 1; i <= steps; ++i) {
        const double alpha = (static_cast<double>(i) - 0.5) / static_cast<double>(steps);
        std::vector<double> point(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            point[j] = baseline[j] + alpha * (x[j] - baseline[j]);
        const auto g = model.gradient(point, output_index);
        for (std::size_t j = 0; j < x.size(); ++j) avg_grad[j] += g[j];
    }
    std::vector<double> ig(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        ig[j] = (x[j] - baseline[j]) * avg_grad[j] / static_cast<double>(steps);

    FeatureAttribution a;
    a.explainer = "ig";
    a.output_index = output_index;
    a.feature_names = source_feature_names(ft);
    a.feature_values = instance;
    a.scores = fold_to_source(ft, ig);
    a.base_value = model.predict(Matrix::from_row(baseline)).at(0, output_index);
    a.has_base = true;
    return a;
}

// ---------------------------------------------------------------------------
// Glass models

FeatureAttribution glass_linear_explain(const ModelHandle& model, const FittedTransform& ft,
                                        const std::vector<Cell>& instance,
                                        std::size_t output_index) {
    if (!model.glass_linear || !model.linear)
        throw model_error("glass_linear_explain: model has no glass-linear capability");
    const auto x = transform_row(ft, instance);
    std::vector<double> contrib(x.size());
    for (std::size_t c = 0; c < x.size(); ++c)
        contrib[c] = model.linear->weights.at(output_index, c) * x[c];

    FeatureAttribution a;
    a.explainer = "glass-linear";
    a.output_index = output_index;
    a.feature_names = source_feature_names(ft);
    a.feature_values = instance;
    a.scores = fold_to_source(ft, contrib);
    a.base_value = model.linear->bias[output_index];
    a.has_base = true;
    return a;
}

DecisionPath glass_tree_explain(const ModelHandle& model, const FittedTransform& ft,
                                const std::vector<Cell>& instance) {
    if (!model.glass_tree || !model.tree)
        throw model_error("glass_tree_explain: model has no glass-tree capability");
    const auto x = transform_row(ft, instance);
    const TreeModel& tree = *model.tree;

    DecisionPath path;
    std::size_t i = 0;
    while (tree.nodes[i].feature >= 0) {
        const auto& node = tree.nodes[i];
        const auto f = static_cast<std::size_t>(node.feature);
        const bool right = x[f] >= node.threshold;
        path.steps.push_back({transformed_feature_name(ft, f), node.threshold, right,
                              node.train_fraction});
        i = static_cast<std::size_t>(right ? node.right : node.left);
    }
    path.leaf_value = tree.nodes[i].leaf_value;
    return path;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json attribution_to_json(const FeatureAttribution& a) {
    nlohmann::json j;
    j["explainer"] = a.explainer;
    j["output_index"] = a.output_index;
    if (!a.output_label.empty()) j["output_label"] = a.output_label;
    nlohmann::json feats = nlohmann::json::array();
    for (std::size_t i = 0; i < a.feature_names.size(); ++i) {
        nlohmann::json f;
        f["feature"] = a.feature_names[i];
        f["value"] = i < a.feature_values.size() ? cell_to_string(a.feature_values[i]) : "";
        f["score"] = a.scores[i];
        feats.push_back(f);
    }
    j["features"] = feats;
    if (a.has_base) j["base_value"] = a.base_value;
    return j;
}

nlohmann::json decision_path_to_json(const DecisionPath& p) {
    nlohmann::json j;
    j["explainer"] = "glass-tree";
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : p.steps) {
        steps.push_back(nlohmann::json{{"feature", s.feature},
                                       {"threshold", s.threshold},
                                       {"branch", s.went_right ? "right" : "left"},
                                       {"train_fraction", s.train_fraction}});
    }
    j["steps"] = steps;
    j["leaf_value"] = p.leaf_value;
    return j;
}

}  // namespace xai

#include "xai/insight.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xai {

namespace {

// Discrete codes for one column: continuous columns are cut into up to 10
// equal-frequency bins, categorical columns use category indices. Missing
// cells get their own code.
std::vector<int> discretize_column(const TabularBatch& batch, std::size_t col, int n_bins = 10) {
    const auto& column = batch.schema.columns[col];
    const std::size_t n = batch.n_rows();
    std::vector<int> codes(n, -1);
    if (column.kind == ColumnKind::Categorical) {
        for (std::size_t r = 0; r < n; ++r) {
            const Cell& c = batch.cell(r, col);
            if (cell_is_missing(c)) { codes[r] = static_cast<int>(column.categories.size()); continue; }
            const auto& label = std::get<std::string>(c);
            const auto it = std::find(column.categories.begin(), column.categories.end(), label);
            codes[r] = static_cast<int>(it - column.categories.begin());
        }
        return codes;
    }
    std::vector<double> values;
    for (std::size_t r = 0; r < n; ++r) {
        const Cell& c = batch.cell(r, col);
        if (!cell_is_missing(c)) values.push_back(std::get<double>(c));
    }
    std::sort(values.begin(), values.end());
    std::vector<double> edges;  // interior edges only, strictly increasing
    for (int i = 1; i < n_bins; ++i) {
        const double pos = static_cast<double>(i) / n_bins * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        const double e = values.empty() ? 0.0
                                        : values[lo] * (1.0 - frac) +
                                              values[std::min(lo + 1, values.size() - 1)] * frac;
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    for (std::size_t r = 0; r < n; ++r) {
        const Cell& c = batch.cell(r, col);
        if (cell_is_missing(c)) { codes[r] = static_cast<int>(edges.size()) + 1; continue; }
        const double v = std::get<double>(c);
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        codes[r] = static_cast<int>(it - edges.begin());
    }
    return codes;
}

int code_cardinality(const std::vector<int>& codes) {
    int m = -1;
    for (int c : codes) m = std::max(m, c);
    return m + 1;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) { ma += a[i]; mb += b[i]; }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

std::vector<std::vector<double>> contingency(const std::vector<int>& a, const std::vector<int>& b) {
    const int ra = code_cardinality(a), rb = code_cardinality(b);
    std::vector<std::vector<double>> table(static_cast<std::size_t>(std::max(ra, 1)),
                                           std::vector<double>(static_cast<std::size_t>(std::max(rb, 1)), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])] += 1.0;
    return table;
}

double cramers_v(const std::vector<int>& a, const std::vector<int>& b) {
    const auto table = contingency(a, b);
    const std::size_t ra = table.size(), rb = table[0].size();
    if (ra < 2 || rb < 2) return 0.0;
    const double n = static_cast<double>(a.size());
    std::vector<double> row_sum(ra, 0.0), col_sum(rb, 0.0);
    for (std::size_t i = 0; i < ra; ++i)
        for (std::size_t j = 0; j < rb; ++j) { row_sum[i] += table[i][j]; col_sum[j] += table[i][j]; }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < ra; ++i)
        for (std::size_t j = 0; j < rb; ++j) {
            const double expected = row_sum[i] * col_sum[j] / n;
            if (expected > 0.0) {
                const double d = table[i][j] - expected;
                chi2 += d * d / expected;
            }
        }
    // drop empty rows/columns from the degrees of freedom
    std::size_t nra = 0, nrb = 0;
    for (double s : row_sum) if (s > 0.0) ++nra;
    for (double s : col_sum) if (s > 0.0) ++nrb;
    if (nra < 2 || nrb < 2) return 0.0;
    const double k = static_cast<double>(std::min(nra, nrb) - 1);
    return std::clamp(std::sqrt(chi2 / (n * k)), 0.0, 1.0);
}

// Plug-in mutual information in nats from a contingency table.
double mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
    const auto table = contingency(a, b);
    const std::size_t ra = table.size(), rb = table[0].size();
    const double n = static_cast<double>(a.size());
    std::vector<double> row_sum(ra, 0.0), col_sum(rb, 0.0);
    for (std::size_t i = 0; i < ra; ++i)
        for (std::size_t j = 0; j < rb; ++j) { row_sum[i] += table[i][j]; col_sum[j] += table[i][j]; }
    double mi = 0.0;
    for (std::size_t i = 0; i < ra; ++i)
        for (std::size_t j = 0; j < rb; ++j) {
            const double pij = table[i][j] / n;
            if (pij <= 0.0) continue;
            mi += pij * std::log(pij * n * n / (row_sum[i] * col_sum[j]));
        }
    return std::max(mi, 0.0);
}

bool column_is_constant(const TabularBatch& batch, std::size_t col) {
    for (std::size_t r = 1; r < batch.n_rows(); ++r)
        if (!(batch.cell(r, col) == batch.cell(0, col))) return false;
    return true;
}

}  // namespace

CorrelationResult correlation_matrix(const TabularBatch& batch) {
    if (batch.n_rows() < 2) throw data_error("correlation_matrix: need at least 2 rows");
    const std::size_t d = batch.schema.n_columns();
    CorrelationResult res;
    res.matrix = Matrix(d, d);
    res.constant_column.resize(d);
    std::vector<std::vector<int>> codes(d);
    std::vector<std::vector<double>> raw(d);
    for (std::size_t c = 0; c < d; ++c) {
        res.feature_names.push_back(batch.schema.columns[c].name);
        res.constant_column[c] = column_is_constant(batch, c);
        codes[c] = discretize_column(batch, c);
        if (batch.schema.columns[c].kind == ColumnKind::Continuous) {
            raw[c].reserve(batch.n_rows());
            for (std::size_t r = 0; r < batch.n_rows(); ++r) {
                const Cell& cell = batch.cell(r, c);
                raw[c].push_back(cell_is_missing(cell) ? 0.0 : std::get<double>(cell));
            }
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            double v;
            if (res.constant_column[i] || res.constant_column[j]) {
                v = 0.0;
            } else if (i == j) {
                v = 1.0;
            } else if (batch.schema.columns[i].kind == ColumnKind::Continuous &&
                       batch.schema.columns[j].kind == ColumnKind::Continuous) {
                v = pearson(raw[i], raw[j]);
            } else {
                v = cramers_v(codes[i], codes[j]);
            }
            res.matrix.at(i, j) = v;
            res.matrix.at(j, i) = v;
        }
    }
    return res;
}

ImbalanceResult class_imbalance(const TabularBatch& batch, const std::string& target,
                                const std::optional<std::string>& by) {
    const auto t_idx = batch.schema.column_index(target);
    if (!t_idx) throw data_error("class_imbalance: no column '" + target + "'");
    const auto& t_col = batch.schema.columns[*t_idx];
    if (t_col.kind != ColumnKind::Categorical)
        throw data_error("class_imbalance: target '" + target + "' is continuous");

    ImbalanceResult res;
    res.class_labels = t_col.categories;
    res.counts.assign(res.class_labels.size(), 0);
    std::optional<std::size_t> b_idx;
    if (by) {
        b_idx = batch.schema.column_index(*by);
        if (!b_idx) throw data_error("class_imbalance: no column '" + *by + "'");
        const auto& b_col = batch.schema.columns[*b_idx];
        if (b_col.kind != ColumnKind::Categorical)
            throw data_error("class_imbalance: 'by' feature must be categorical");
        res.by_feature = *by;
        res.by_categories = b_col.categories;
        res.cross_counts.assign(res.class_labels.size(),
                                std::vector<std::size_t>(res.by_categories.size(), 0));
    }
    for (std::size_t r = 0; r < batch.n_rows(); ++r) {
        const auto& label = std::get<std::string>(batch.cell(r, *t_idx));
        const auto ci = static_cast<std::size_t>(
            std::find(res.class_labels.begin(), res.class_labels.end(), label) -
            res.class_labels.begin());
        ++res.counts[ci];
        if (b_idx) {
            const auto& blabel = std::get<std::string>(batch.cell(r, *b_idx));
            const auto bi = static_cast<std::size_t>(
                std::find(res.by_categories.begin(), res.by_categories.end(), blabel) -
                res.by_categories.begin());
            ++res.cross_counts[ci][bi];
        }
    }
    const double n = static_cast<double>(batch.n_rows());
    for (auto c : res.counts) res.frequencies.push_back(static_cast<double>(c) / n);
    return res;
}

FeatureSelectionResult select_features(const TabularBatch& batch, const std::string& target,
                                       std::size_t k) {
    const auto t_idx = batch.schema.column_index(target);
    if (!t_idx) throw data_error("select_features: no column '" + target + "'");
    if (k < 1) throw data_error("select_features: k must be >= 1");
    const auto t_codes = discretize_column(batch, *t_idx);

    FeatureSelectionResult res;
    for (std::size_t c = 0; c < batch.schema.n_columns(); ++c) {
        if (c == *t_idx) continue;
        const auto codes = discretize_column(batch, c);
        res.ranked.emplace_back(batch.schema.columns[c].name, mutual_information(codes, t_codes));
    }
    // ties broken by schema column order (stable sort keeps it)
    std::stable_sort(res.ranked.begin(), res.ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    k = std::min(k, res.ranked.size());
    for (std::size_t i = 0; i < k; ++i) res.selected.push_back(res.ranked[i].first);
    return res;
}

nlohmann::json correlation_to_json(const CorrelationResult& r) {
    nlohmann::json j;
    j["explainer"] = "correlation";
    j["features"] = r.feature_names;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < r.matrix.rows; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (double v : r.matrix.row(i)) row.push_back(v);
        rows.push_back(row);
    }
    j["matrix"] = rows;
    j["constant_columns"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.constant_column.size(); ++i)
        if (r.constant_column[i]) j["constant_columns"].push_back(r.feature_names[i]);
    return j;
}

nlohmann::json imbalance_to_json(const ImbalanceResult& r) {
    nlohmann::json j;
    j["explainer"] = "imbalance";
    j["classes"] = r.class_labels;
    j["counts"] = r.counts;
    j["frequencies"] = r.frequencies;
    if (r.by_feature) {
        j["by_feature"] = *r.by_feature;
        j["by_categories"] = r.by_categories;
        j["cross_counts"] = r.cross_counts;
    }
    return j;
}

nlohmann::json feature_selection_to_json(const FeatureSelectionResult& r) {
    nlohmann::json j;
    j["explainer"] = "feature-selection";
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& [name, score] : r.ranked)
        ranked.push_back(nlohmann::json{{"feature", name}, {"mi", score}});
    j["ranked"] = ranked;
    j["selected"] = r.selected;
    return j;
}

}  // namespace xai

#include "xai/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace xai {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

const char* encoding_name(CategoricalEncoding e) {
    return e == CategoricalEncoding::OneHot ? "one-hot" : "ordinal";
}
const char* scaling_name(ContinuousScaling s) {
    switch (s) {
        case ContinuousScaling::Identity: return "identity";
        case ContinuousScaling::Standardize: return "standardize";
        case ContinuousScaling::MinMax: return "min-max";
        case ContinuousScaling::KBins: return "kbins";
    }
    return "identity";
}
const char* fill_name(NanFill f) {
    switch (f) {
        case NanFill::Mean: return "mean";
        case NanFill::Median: return "median";
        case NanFill::Constant: return "constant";
    }
    return "mean";
}

}  // namespace

const ColumnDirective& TransformSpec::for_column(const std::string& name) const {
    for (const auto& [col, directive] : overrides)
        if (col == name) return directive;
    return defaults;
}

TransformSpec TransformSpec::standard() {
    TransformSpec spec;
    spec.defaults.categorical = CategoricalEncoding::OneHot;
    spec.defaults.continuous = ContinuousScaling::Standardize;
    spec.defaults.nan_fill = NanFill::Mean;
    return spec;
}

std::size_t FittedTransform::column_width(std::size_t col) const {
    const auto& fc = columns[col];
    if (fc.kind == ColumnKind::Categorical &&
        fc.directive.categorical == CategoricalEncoding::OneHot)
        return fc.categories.size();
    return 1;
}

FittedTransform fit_transform_spec(const TransformSpec& spec, const TabularBatch& train) {
    if (train.n_rows() == 0) throw data_error("fit_transform_spec: empty training batch");
    train.validate();

    FittedTransform ft;
    ft.schema = train.schema;
    if (train.schema.target) {
        // target column is excluded from the feature layout
        auto& cols = ft.schema.columns;
        const auto idx = ft.schema.column_index(*train.schema.target);
        cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(*idx));
        ft.schema.target.reset();
    }

    for (std::size_t c = 0; c < ft.schema.n_columns(); ++c) {
        const auto& col = ft.schema.columns[c];
        const auto src = *train.schema.column_index(col.name);
        FittedColumn fc;
        fc.name = col.name;
        fc.kind = col.kind;
        fc.directive = spec.for_column(col.name);
        if (col.kind == ColumnKind::Categorical) {
            fc.categories = col.categories;
        } else {
            std::vector<double> values;
            values.reserve(train.n_rows());
            for (std::size_t r = 0; r < train.n_rows(); ++r) {
                const Cell& cell = train.cell(r, src);
                if (!cell_is_missing(cell)) values.push_back(std::get<double>(cell));
            }
            if (values.empty() && fc.directive.nan_fill != NanFill::Constant)
                throw data_error("fit_transform_spec: column '" + col.name +
                                 "' is all-missing, cannot fill with " +
                                 fill_name(fc.directive.nan_fill));
            std::vector<double> sorted = values;
            std::sort(sorted.begin(), sorted.end());
            switch (fc.directive.nan_fill) {
                case NanFill::Mean: {
                    double s = 0.0;
                    for (double v : values) s += v;
                    fc.fill_value = s / static_cast<double>(values.size());
                    break;
                }
                case NanFill::Median:
                    fc.fill_value = quantile_sorted(sorted, 0.5);
                    break;
                case NanFill::Constant:
                    fc.fill_value = fc.directive.nan_constant;
                    break;
            }
            // statistics computed on values with missing cells filled
            std::vector<double> filled = values;
            for (std::size_t r = values.size(); r < train.n_rows(); ++r)
                filled.push_back(fc.fill_value);
            double s = 0.0;
            for (double v : filled) s += v;
            fc.mean = s / static_cast<double>(filled.size());
            double ss = 0.0;
            for (double v : filled) ss += (v - fc.mean) * (v - fc.mean);
            // population std
            fc.stdev = std::sqrt(ss / static_cast<double>(filled.size()));
            fc.min = *std::min_element(filled.begin(), filled.end());
            fc.max = *std::max_element(filled.begin(), filled.end());
            if (fc.directive.continuous == ContinuousScaling::Standardize && fc.stdev <= 0.0)
                fc.zero_variance = true;
            if (fc.directive.continuous == ContinuousScaling::MinMax && fc.max <= fc.min)
                fc.zero_variance = true;
            if (fc.directive.continuous == ContinuousScaling::KBins) {
                const int nb = fc.directive.kbins_n_bins;
                if (nb < 2) throw data_error("kbins: n_bins must be >= 2");
                std::vector<double> fsorted = filled;
                std::sort(fsorted.begin(), fsorted.end());
                std::vector<double> edges;
                for (int i = 0; i <= nb; ++i)
                    edges.push_back(quantile_sorted(fsorted, static_cast<double>(i) / nb));
                // keep edges strictly increasing
                fc.bin_edges.push_back(edges.front());
                for (double e : edges)
                    if (e > fc.bin_edges.back()) fc.bin_edges.push_back(e);
                if (fc.bin_edges.size() < 2) {
                    fc.bin_edges = {fc.min, fc.min + 1.0};
                    fc.zero_variance = true;
                }
            }
        }
        ft.columns.push_back(std::move(fc));
    }

    for (std::size_t c = 0; c < ft.columns.size(); ++c)
        for (std::size_t s = 0; s < ft.column_width(c); ++s)
            ft.layout.emplace_back(c, s);
    return ft;
}

namespace {

// Bin index with the last bin closed on the right.
std::size_t kbins_index(const FittedColumn& fc, double v) {
    const auto& e = fc.bin_edges;
    if (v <= e.front()) return 0;
    if (v >= e[e.size() - 2]) return e.size() - 2;
    auto it = std::upper_bound(e.begin(), e.end(), v);
    return static_cast<std::size_t>(it - e.begin()) - 1;
}

double scale_value(const FittedColumn& fc, double v) {
    switch (fc.directive.continuous) {
        case ContinuousScaling::Identity: return v;
        case ContinuousScaling::Standardize:
            return fc.zero_variance ? v : (v - fc.mean) / fc.stdev;
        case ContinuousScaling::MinMax:
            return fc.zero_variance ? v : (v - fc.min) / (fc.max - fc.min);
        case ContinuousScaling::KBins:
            return static_cast<double>(kbins_index(fc, v));
    }
    return v;
}

double unscale_value(const FittedColumn& fc, double v) {
    switch (fc.directive.continuous) {
        case ContinuousScaling::Identity: return v;
        case ContinuousScaling::Standardize:
            return fc.zero_variance ? v : v * fc.stdev + fc.mean;
        case ContinuousScaling::MinMax:
            return fc.zero_variance ? v : v * (fc.max - fc.min) + fc.min;
        case ContinuousScaling::KBins: {
            const auto& e = fc.bin_edges;
            auto b = static_cast<std::size_t>(std::llround(std::max(0.0, v)));
            b = std::min(b, e.size() - 2);
            return 0.5 * (e[b] + e[b + 1]);
        }
    }
    return v;
}

}  // namespace

std::vector<double> transform_row(const FittedTransform& ft, const std::vector<Cell>& row) {
    // row must be in ft.schema column order
    std::vector<double> out;
    out.reserve(ft.output_width());
    for (std::size_t c = 0; c < ft.columns.size(); ++c) {
        const auto& fc = ft.columns[c];
        const Cell& cell = row[c];
        if (fc.kind == ColumnKind::Continuous) {
            const double raw = cell_is_missing(cell) ? fc.fill_value : std::get<double>(cell);
            out.push_back(scale_value(fc, raw));
        } else if (fc.directive.categorical == CategoricalEncoding::OneHot) {
            std::size_t hit = fc.categories.size();
            if (!cell_is_missing(cell)) {
                const auto& label = std::get<std::string>(cell);
                for (std::size_t k = 0; k < fc.categories.size(); ++k)
                    if (fc.categories[k] == label) { hit = k; break; }
            }
            for (std::size_t k = 0; k < fc.categories.size(); ++k)
                out.push_back(k == hit ? 1.0 : 0.0);
        } else {
            double code = -1.0;
            if (!cell_is_missing(cell)) {
                const auto& label = std::get<std::string>(cell);
                for (std::size_t k = 0; k < fc.categories.size(); ++k)
                    if (fc.categories[k] == label) { code = static_cast<double>(k); break; }
            }
            out.push_back(code);
        }
    }
    return out;
}

Matrix transform(const FittedTransform& ft, const TabularBatch& batch) {
    // map fitted feature columns onto the batch's column order by name
    std::vector<std::size_t> src(ft.columns.size());
    for (std::size_t c = 0; c < ft.columns.size(); ++c) {
        const auto idx = batch.schema.column_index(ft.columns[c].name);
        if (!idx)
            throw data_error("transform: batch is missing column '" + ft.columns[c].name + "'");
        src[c] = *idx;
    }
    Matrix m(batch.n_rows(), ft.output_width());
    for (std::size_t r = 0; r < batch.n_rows(); ++r) {
        std::vector<Cell> row(ft.columns.size());
        for (std::size_t c = 0; c < ft.columns.size(); ++c) row[c] = batch.cell(r, src[c]);
        const auto v = transform_row(ft, row);
        std::copy(v.begin(), v.end(), m.row(r).begin());
    }
    return m;
}

std::vector<Cell> inverse_transform_row(const FittedTransform& ft, std::span<const double> v) {
    if (v.size() != ft.output_width())
        throw data_error("inverse_transform: width " + std::to_string(v.size()) + " != " +
                         std::to_string(ft.output_width()));
    std::vector<Cell> row;
    row.reserve(ft.columns.size());
    std::size_t pos = 0;
    for (std::size_t c = 0; c < ft.columns.size(); ++c) {
        const auto& fc = ft.columns[c];
        const std::size_t width = ft.column_width(c);
        if (fc.kind == ColumnKind::Continuous) {
            row.emplace_back(unscale_value(fc, v[pos]));
        } else if (fc.directive.categorical == CategoricalEncoding::OneHot) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < width; ++k)
                if (v[pos + k] > v[pos + best]) best = k;
            row.emplace_back(fc.categories[best]);
        } else {
            auto k = static_cast<std::size_t>(std::llround(std::max(0.0, v[pos])));
            k = std::min(k, fc.categories.size() - 1);
            row.emplace_back(fc.categories[k]);
        }
        pos += width;
    }
    return row;
}

TabularBatch inverse_transform(const FittedTransform& ft, const Matrix& m) {
    TabularBatch batch;
    batch.schema = ft.schema;
    for (std::size_t r = 0; r < m.rows; ++r)
        batch.rows.push_back(inverse_transform_row(ft, m.row(r)));
    batch.validate();
    return batch;
}

std::vector<double> target_vector(const TabularBatch& batch) {
    if (!batch.schema.target) throw data_error("target_vector: schema has no target");
    const auto idx = *batch.schema.column_index(*batch.schema.target);
    const auto& col = batch.schema.columns[idx];
    std::vector<double> y;
    y.reserve(batch.n_rows());
    for (std::size_t r = 0; r < batch.n_rows(); ++r) {
        const Cell& cell = batch.cell(r, idx);
        if (cell_is_missing(cell)) throw data_error("target_vector: missing target value");
        if (col.kind == ColumnKind::Continuous) {
            y.push_back(std::get<double>(cell));
        } else {
            const auto& label = std::get<std::string>(cell);
            const auto it = std::find(col.categories.begin(), col.categories.end(), label);
            y.push_back(static_cast<double>(it - col.categories.begin()));
        }
    }
    return y;
}

namespace {

nlohmann::json directive_to_json(const ColumnDirective& d) {
    nlohmann::json j;
    j["categorical"] = encoding_name(d.categorical);
    j["continuous"] = scaling_name(d.continuous);
    j["kbins_n_bins"] = d.kbins_n_bins;
    j["nan_fill"] = fill_name(d.nan_fill);
    j["nan_constant"] = d.nan_constant;
    return j;
}

ColumnDirective directive_from_json(const nlohmann::json& j) {
    ColumnDirective d;
    const auto enc = j.value("categorical", std::string("one-hot"));
    d.categorical = enc == "ordinal" ? CategoricalEncoding::Ordinal : CategoricalEncoding::OneHot;
    const auto sc = j.value("continuous", std::string("identity"));
    if (sc == "standardize") d.continuous = ContinuousScaling::Standardize;
    else if (sc == "min-max") d.continuous = ContinuousScaling::MinMax;
    else if (sc == "kbins") d.continuous = ContinuousScaling::KBins;
    else if (sc == "identity") d.continuous = ContinuousScaling::Identity;
    else throw data_error("transform spec: unknown scaling '" + sc + "'");
    d.kbins_n_bins = j.value("kbins_n_bins", 2);
    const auto fill = j.value("nan_fill", std::string("mean"));
    if (fill == "mean") d.nan_fill = NanFill::Mean;
    else if (fill == "median") d.nan_fill = NanFill::Median;
    else if (fill == "constant") d.nan_fill = NanFill::Constant;
    else throw data_error("transform spec: unknown nan_fill '" + fill + "'");
    d.nan_constant = j.value("nan_constant", 0.0);
    return d;
}

}  // namespace

TransformSpec transform_spec_from_json(const nlohmann::json& j) {
    TransformSpec spec;
    if (j.contains("defaults")) spec.defaults = directive_from_json(j["defaults"]);
    if (j.contains("columns"))
        for (auto it = j["columns"].begin(); it != j["columns"].end(); ++it)
            spec.overrides.emplace_back(it.key(), directive_from_json(it.value()));
    return spec;
}

nlohmann::json transform_to_json(const FittedTransform& ft) {
    nlohmann::json j;
    j["schema"] = schema_to_json(ft.schema);
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& fc : ft.columns) {
        nlohmann::json jc;
        jc["name"] = fc.name;
        jc["kind"] = fc.kind == ColumnKind::Continuous ? "continuous" : "categorical";
        jc["directive"] = directive_to_json(fc.directive);
        jc["mean"] = fc.mean;
        jc["stdev"] = fc.stdev;
        jc["min"] = fc.min;
        jc["max"] = fc.max;
        jc["fill_value"] = fc.fill_value;
        jc["zero_variance"] = fc.zero_variance;
        jc["bin_edges"] = fc.bin_edges;
        jc["categories"] = fc.categories;
        cols.push_back(jc);
    }
    j["columns"] = cols;
    return j;
}

FittedTransform transform_from_json(const nlohmann::json& j) {
    FittedTransform ft;
    ft.schema = schema_from_json(j.at("schema"));
    for (const auto& jc : j.at("columns")) {
        FittedColumn fc;
        fc.name = jc.at("name").get<std::string>();
        fc.kind = jc.at("kind").get<std::string>() == "continuous" ? ColumnKind::Continuous
                                                                   : ColumnKind::Categorical;
        fc.directive = directive_from_json(jc.at("directive"));
        fc.mean = jc.at("mean").get<double>();
        fc.stdev = jc.at("stdev").get<double>();
        fc.min = jc.at("min").get<double>();
        fc.max = jc.at("max").get<double>();
        fc.fill_value = jc.at("fill_value").get<double>();
        fc.zero_variance = jc.at("zero_variance").get<bool>();
        fc.bin_edges = jc.at("bin_edges").get<std::vector<double>>();
        fc.categories = jc.at("categories").get<std::vector<std::string>>();
        ft.columns.push_back(std::move(fc));
    }
    for (std::size_t c = 0; c < ft.columns.size(); ++c)
        for (std::size_t s = 0; s < ft.column_width(c); ++s)
            ft.layout.emplace_back(c, s);
    return ft;
}

}  // namespace xai

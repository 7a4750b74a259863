#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xai/matrix.hpp"
#include "xai/tabular.hpp"

namespace xai {

enum class CategoricalEncoding { OneHot, Ordinal };
enum class ContinuousScaling { Identity, Standardize, MinMax, KBins };
enum class NanFill { Mean, Median, Constant };

struct ColumnDirective {
    CategoricalEncoding categorical = CategoricalEncoding::OneHot;
    ContinuousScaling continuous = ContinuousScaling::Identity;
    int kbins_n_bins = 2;
    NanFill nan_fill = NanFill::Mean;
    double nan_constant = 0.0;
};

// Per-column directive map; columns absent from `overrides` use `defaults`.
struct TransformSpec {
    ColumnDirective defaults;
    std::vector<std::pair<std::string, ColumnDirective>> overrides;

    const ColumnDirective& for_column(const std::string& name) const;
    static TransformSpec standard();  // standardize continuous, one-hot categorical
};

struct FittedColumn {
    ColumnDirective directive;
    ColumnKind kind = ColumnKind::Continuous;
    std::string name;
    double mean = 0.0;
    double stdev = 1.0;
    double min = 0.0;
    double max = 1.0;
    double fill_value = 0.0;
    bool zero_variance = false;  // standardize fell back to identity
    std::vector<double> bin_edges;          // kbins interior+outer edges, strictly increasing
    std::vector<std::string> categories;    // categorical table, schema order
};

struct FittedTransform {
    TabularSchema schema;  // source schema (target column excluded from the layout)
    std::vector<FittedColumn> columns;
    // Output layout: (source column index, slot within that column's encoding).
    std::vector<std::pair<std::size_t, std::size_t>> layout;

    std::size_t output_width() const { return layout.size(); }
    // Output slot count for one source column.
    std::size_t column_width(std::size_t col) const;
};

// Fits statistics on the training batch. The target column, if named in the
// schema, is excluded from the feature layout.
FittedTransform fit_transform_spec(const TransformSpec& spec, const TabularBatch& train);

Matrix transform(const FittedTransform& ft, const TabularBatch& batch);
std::vector<double> transform_row(const FittedTransform& ft, const std::vector<Cell>& row);

TabularBatch inverse_transform(const FittedTransform& ft, const Matrix& m);
std::vector<Cell> inverse_transform_row(const FittedTransform& ft, std::span<const double> v);

// Extracts targets as a numeric vector: class index for a categorical target,
// raw value for a continuous one.
std::vector<double> target_vector(const TabularBatch& batch);

nlohmann::json transform_to_json(const FittedTransform& ft);
FittedTransform transform_from_json(const nlohmann::json& j);

TransformSpec transform_spec_from_json(const nlohmann::json& j);

}  // namespace xai

#pragma once

#include <cstddef>
#include <vector>

#include "xai/matrix.hpp"
#include "xai/model.hpp"
#include "xai/preprocess.hpp"

namespace xai {

// A model composed with its fitted preprocessing: explainers work in
// source-feature space, the model in transformed space. Rows are pushed
// through predict in chunks of at most batch_size.
struct TabularPredictor {
    const ModelHandle* model = nullptr;
    const FittedTransform* transform = nullptr;
    std::size_t batch_size = 256;

    // rows are cell vectors in transform->schema column order.
    Matrix predict_rows(const std::vector<std::vector<Cell>>& rows) const {
        Matrix out(0, model->n_outputs);
        std::size_t pos = 0;
        while (pos < rows.size()) {
            const std::size_t chunk = std::min(batch_size, rows.size() - pos);
            Matrix m(chunk, transform->output_width());
            for (std::size_t i = 0; i < chunk; ++i) {
                const auto v = transform_row(*transform, rows[pos + i]);
                std::copy(v.begin(), v.end(), m.row(i).begin());
            }
            out = vcat(out, model->predict(m));
            pos += chunk;
        }
        return out;
    }

    std::vector<double> predict_row(const std::vector<Cell>& row) const {
        return predict_rows({row}).row_vec(0);
    }
};

// Feature cells of one batch row reordered to the fitted schema.
inline std::vector<Cell> feature_row(const FittedTransform& ft, const TabularBatch& batch,
                                     std::size_t r) {
    std::vector<Cell> row(ft.schema.n_columns());
    for (std::size_t c = 0; c < ft.schema.n_columns(); ++c) {
        const auto idx = batch.schema.column_index(ft.schema.columns[c].name);
        if (!idx) throw data_error("batch is missing column '" + ft.schema.columns[c].name + "'");
        row[c] = batch.cell(r, *idx);
    }
    return row;
}

inline std::vector<std::vector<Cell>> feature_rows(const FittedTransform& ft,
                                                   const TabularBatch& batch) {
    std::vector<std::vector<Cell>> rows;
    rows.reserve(batch.n_rows());
    for (std::size_t r = 0; r < batch.n_rows(); ++r) rows.push_back(feature_row(ft, batch, r));
    return rows;
}

}  // namespace xai

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xai/matrix.hpp"
#include "xai/tabular.hpp"

namespace xai {

// Pearson for continuous pairs, Cramér's V for categorical and mixed pairs
// (the continuous side discretized into 10 equal-frequency bins).
struct CorrelationResult {
    std::vector<std::string> feature_names;
    Matrix matrix;  // symmetric
    std::vector<bool> constant_column;
};

struct ImbalanceResult {
    std::vector<std::string> class_labels;
    std::vector<std::size_t> counts;
    std::vector<double> frequencies;
    std::optional<std::string> by_feature;
    std::vector<std::string> by_categories;
    std::vector<std::vector<std::size_t>> cross_counts;  // class x by-category
};

struct FeatureSelectionResult {
    std::vector<std::pair<std::string, double>> ranked;  // non-increasing MI (nats)
    std::vector<std::string> selected;                   // top k
};

CorrelationResult correlation_matrix(const TabularBatch& batch);
ImbalanceResult class_imbalance(const TabularBatch& batch, const std::string& target,
                                const std::optional<std::string>& by = std::nullopt);
FeatureSelectionResult select_features(const TabularBatch& batch, const std::string& target,
                                       std::size_t k);

nlohmann::json correlation_to_json(const CorrelationResult& r);
nlohmann::json imbalance_to_json(const ImbalanceResult& r);
nlohmann::json feature_selection_to_json(const FeatureSelectionResult& r);

}  // namespace xai

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "xai/predictor.hpp"

namespace xai {

struct FeatureAttribution {
    std::string explainer;
    std::size_t output_index = 0;
    std::string output_label;
    std::vector<std::string> feature_names;
    std::vector<Cell> feature_values;  // instance values shown next to scores
    std::vector<double> scores;
    double base_value = 0.0;
    bool has_base = false;
};

struct DecisionPath {
    struct Step {
        std::string feature;
        double threshold = 0.0;
        bool went_right = false;  // right when value >= threshold
        double train_fraction = 1.0;
    };
    std::vector<Step> steps;
    std::vector<double> leaf_value;
};

// LIME for tabular data: quartile discretization, per-feature marginal
// sampling, exponential kernel on the binary Hamming distance, weighted
// ridge (penalty 1.0), top-k truncation of the returned scores.
FeatureAttribution lime_explain(const TabularPredictor& predictor, const TabularBatch& train,
                                const std::vector<Cell>& instance, std::size_t output_index,
                                std::size_t n_samples, std::size_t top_k, std::uint64_t seed);

// KernelSHAP over source features. Feature absence = background row value,
// averaged over min(|background|, 100) rows. When every non-trivial
// coalition fits the budget the result is the exact Shapley value.
FeatureAttribution kernel_shap(const TabularPredictor& predictor, const TabularBatch& background,
                               const std::vector<Cell>& instance, std::size_t output_index,
                               std::size_t n_coalitions, std::uint64_t seed);

// Integrated gradients (midpoint rule) in transformed space, reported per
// source feature with one-hot slots summed.
FeatureAttribution integrated_gradients(const ModelHandle& model, const FittedTransform& ft,
                                        const std::vector<Cell>& instance,
                                        const std::vector<double>& baseline, std::size_t steps,
                                        std::size_t output_index);

FeatureAttribution glass_linear_explain(const ModelHandle& model, const FittedTransform& ft,
                                        const std::vector<Cell>& instance,
                                        std::size_t output_index);

DecisionPath glass_tree_explain(const ModelHandle& model, const FittedTransform& ft,
                                const std::vector<Cell>& instance);

nlohmann::json attribution_to_json(const FeatureAttribution& a);
nlohmann::json decision_path_to_json(const DecisionPath& p);

}  // namespace xai

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xai/predictor.hpp"

namespace xai {

struct CFProblem {
    std::vector<Cell> instance;  // source-feature space, fitted schema order
    std::optional<std::size_t> target_class;  // default: any class != original
    std::set<std::string> immutable;
    double lambda0 = 0.1;
    double lambda_cap = 1e4;
    double hinge_margin = 0.0;
};

struct CFExample {
    std::vector<Cell> values;
    struct Change {
        std::string feature;
        Cell old_value;
        Cell new_value;
    };
    std::vector<Change> changed;
    std::size_t predicted_class = 0;
    double probability = 0.0;
    double l1_distance = 0.0;  // standardized continuous + unit categorical
    bool valid = false;
};

struct CounterfactualResult {
    std::string explainer;
    std::size_t original_class = 0;
    bool found = false;
    double best_probability = 0.0;  // best target-class probability seen
    std::vector<CFExample> examples;
};

struct WachterConfig {
    int steps = 500;
    double learning_rate = 0.05;
    double fd_step = 1e-4;  // central differences when no analytic gradient
    std::uint64_t seed = 0;
};

struct MaceConfig {
    std::size_t max_changed_features = 3;
    std::size_t n_examples = 1;
    std::size_t eval_budget = 100000;  // model rows evaluated
    std::uint64_t seed = 0;
};

// Hinge/L1 counterfactual search by proximal gradient descent with an
// escalating lambda schedule. Mutable features must be continuous.
CounterfactualResult wachter_ce(const TabularPredictor& predictor, const CFProblem& problem,
                                const WachterConfig& config);

// Black-box greedy substitution search over train-derived candidate values,
// with revert pruning and feature-exclusion diversity.
CounterfactualResult mace_cf(const TabularPredictor& predictor, const TabularBatch& train,
                             const CFProblem& problem, const MaceConfig& config);

nlohmann::json counterfactual_to_json(const CounterfactualResult& r);

}  // namespace xai

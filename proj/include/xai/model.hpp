#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xai/matrix.hpp"
#include "xai/timeseries.hpp"

namespace xai {

enum class Task { Classification, Regression, AnomalyScore };

std::string task_name(Task t);
Task task_from_name(const std::string& name);

struct LinearModel {
    Matrix weights;             // n_outputs x d
    std::vector<double> bias;   // n_outputs
};

struct TreeNode {
    int feature = -1;           // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double train_fraction = 1.0;
    std::vector<double> leaf_value;  // class distribution or regression mean
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // node 0 is the root
    std::size_t n_features = 0;
    int max_depth = 0;

    // Routing rule: left if value < threshold, right otherwise.
    std::size_t route(std::span<const double> x) const;
};

struct MlpModel {
    std::vector<Matrix> weights;              // layer l: out x in
    std::vector<std::vector<double>> biases;  // layer l: out
    // tanh on hidden layers, identity on the output layer
};

// The black-box prediction contract. predict maps an n x d matrix to
// n x n_outputs; softmax postprocessing turns logits into probabilities.
struct ModelHandle {
    Task task = Task::Regression;
    std::size_t n_outputs = 1;
    std::size_t input_dim = 0;
    bool softmax = false;

    bool differentiable = false;
    bool glass_linear = false;
    bool glass_tree = false;
    bool constant_warning = false;  // degenerate single-class training

    std::function<Matrix(const Matrix&)> predict_fn;  // raw outputs
    std::function<std::vector<double>(std::span<const double>, std::size_t)> gradient_fn;

    std::shared_ptr<const LinearModel> linear;
    std::shared_ptr<const TreeModel> tree;

    std::string kind;        // persistence tag
    nlohmann::json params;   // persistence payload

    Matrix predict(const Matrix& x) const;
    // Gradient of the post-processed output k.
    std::vector<double> gradient(std::span<const double> x, std::size_t k) const;
};

struct TrainConfig {
    std::uint64_t seed = 0;
    Task task = Task::Classification;    // tree/mlp only; linear/logistic imply theirs
    double learning_rate = 0.1;
    int max_iters = 2000;
    double tolerance = 1e-9;
    int max_depth = 6;
    int min_samples_split = 2;
    std::vector<std::size_t> hidden_sizes = {16};
};

// kinds: "linear" (least-squares regression), "logistic" (multinomial,
// softmax probabilities), "tree" (CART), "mlp" (tanh hidden layers).
// Deterministic given config.seed. Single-class classification targets give
// a constant predictor with constant_warning set.
ModelHandle train_builtin(const std::string& kind, const Matrix& x,
                          const std::vector<double>& targets, const TrainConfig& config);

ModelHandle make_linear_handle(LinearModel m, Task task, bool softmax);
ModelHandle make_tree_handle(TreeModel m, Task task);
ModelHandle make_mlp_handle(MlpModel m, Task task, bool softmax);

nlohmann::json model_to_json(const ModelHandle& h);
ModelHandle model_from_json(const nlohmann::json& j);

// Statistics-based anomaly detector: score = max_t |x_t - mean| / std.
struct ThresholdDetector {
    double train_mean = 0.0;
    double train_std = 1.0;  // floored at 1e-12
    double kappa = 3.0;
};

struct DetectionResult {
    double score = 0.0;
    bool is_anomaly = false;
    std::vector<double> deviations;  // per timestamp
};

ThresholdDetector fit_detector(const TimeseriesWindow& train, double kappa);
DetectionResult detect(const ThresholdDetector& d, const TimeseriesWindow& window);

}  // namespace xai

#include "xai/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xai/error.hpp"
#include "xai/linalg.hpp"
#include "xai/rng.hpp"

namespace xai {

std::string task_name(Task t) {
    switch (t) {
        case Task::Classification: return "classification";
        case Task::Regression: return "regression";
        case Task::AnomalyScore: return "anomaly-score";
    }
    return "regression";
}

Task task_from_name(const std::string& name) {
    if (name == "classification") return Task::Classification;
    if (name == "regression") return Task::Regression;
    if (name == "anomaly-score") return Task::AnomalyScore;
    throw model_error("unknown task '" + name + "'");
}

namespace {

void softmax_row(std::span<double> row) {
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double& v : row) { v = std::exp(v - m); s += v; }
    for (double& v : row) v /= s;
}

}  // namespace

Matrix ModelHandle::predict(const Matrix& x) const {
    if (input_dim != 0 && x.cols != input_dim && x.rows > 0)
        throw model_error("predict: input width " + std::to_string(x.cols) + " != " +
                          std::to_string(input_dim));
    if (x.rows == 0) return Matrix(0, n_outputs);
    Matrix out = predict_fn(x);
    if (out.rows != x.rows || out.cols != n_outputs)
        throw model_error("predict: model returned " + std::to_string(out.rows) + "x" +
                          std::to_string(out.cols) + ", expected " + std::to_string(x.rows) +
                          "x" + std::to_string(n_outputs));
    if (softmax)
        for (std::size_t r = 0; r < out.rows; ++r) softmax_row(out.row(r));
    return out;
}

std::vector<double> ModelHandle::gradient(std::span<const double> x, std::size_t k) const {
    if (!differentiable || !gradient_fn)
        throw model_error("gradient: model is not differentiable");
    if (!softmax) return gradient_fn(x, k);
    // chain rule through softmax: dp_k = p_k (g_k - sum_j p_j g_j)
    Matrix probs = predict(Matrix::from_row(x));
    std::vector<std::vector<double>> raw(n_outputs);
    for (std::size_t j = 0; j < n_outputs; ++j) raw[j] = gradient_fn(x, j);
    std::vector<double> mix(x.size(), 0.0);
    for (std::size_t j = 0; j < n_outputs; ++j)
        for (std::size_t i = 0; i < x.size(); ++i) mix[i] += probs.at(0, j) * raw[j][i];
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = probs.at(0, k) * (raw[k][i] - mix[i]);
    return g;
}

// ---------------------------------------------------------------------------
// Linear

ModelHandle make_linear_handle(LinearModel m, Task task, bool softmax) {
    auto shared = std::make_shared<const LinearModel>(std::move(m));
    ModelHandle h;
    h.task = task;
    h.n_outputs = shared->weights.rows;
    h.input_dim = shared->weights.cols;
    h.softmax = softmax;
    h.differentiable = true;
    h.glass_linear = true;
    h.linear = shared;
    h.kind = softmax ? "logistic" : "linear";
    h.predict_fn = [shared](const Matrix& x) {
        Matrix out(x.rows, shared->weights.rows);
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t k = 0; k < shared->weights.rows; ++k) {
                double s = shared->bias[k];
                for (std::size_t c = 0; c < x.cols; ++c)
                    s += shared->weights.at(k, c) * x.at(r, c);
                out.at(r, k) = s;
            }
        return out;
    };
    h.gradient_fn = [shared](std::span<const double>, std::size_t k) {
        return shared->weights.row_vec(k);
    };
    nlohmann::json p;
    p["weights"] = shared->weights.data;
    p["bias"] = shared->bias;
    p["n_outputs"] = shared->weights.rows;
    p["input_dim"] = shared->weights.cols;
    p["task"] = task_name(task);
    p["softmax"] = softmax;
    h.params = p;
    return h;
}

// ---------------------------------------------------------------------------
// Tree

std::size_t TreeModel::route(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0)
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <
                                     nodes[i].threshold
                                         ? nodes[i].left
                                         : nodes[i].right);
    return i;
}

namespace {

std::vector<double> leaf_stat(const Matrix& x, const std::vector<double>& y,
                              const std::vector<std::size_t>& idx, Task task,
                              std::size_t n_classes) {
    (void)x;
    if (task == Task::Classification) {
        std::vector<double> dist(n_classes, 0.0);
        for (auto i : idx) dist[static_cast<std::size_t>(y[i])] += 1.0;
        for (double& v : dist) v /= static_cast<double>(idx.size());
        return dist;
    }
    double s = 0.0;
    for (auto i : idx) s += y[i];
    return {s / static_cast<double>(idx.size())};
}

double impurity(const std::vector<double>& y, const std::vector<std::size_t>& idx, Task task,
                std::size_t n_classes) {
    if (idx.empty()) return 0.0;
    if (task == Task::Classification) {
        std::vector<double> counts(n_classes, 0.0);
        for (auto i : idx) counts[static_cast<std::size_t>(y[i])] += 1.0;
        double gini = 1.0;
        for (double c : counts) {
            const double p = c / static_cast<double>(idx.size());
            gini -= p * p;
        }
        return gini;
    }
    double mean = 0.0;
    for (auto i : idx) mean += y[i];
    mean /= static_cast<double>(idx.size());
    double var = 0.0;
    for (auto i : idx) var += (y[i] - mean) * (y[i] - mean);
    return var / static_cast<double>(idx.size());
}

struct TreeBuilder {
    const Matrix& x;
    const std::vector<double>& y;
    Task task;
    std::size_t n_classes;
    const TrainConfig& config;
    TreeModel tree;

    int build(std::vector<std::size_t> idx, int depth) {
        TreeNode node;
        node.train_fraction = static_cast<double>(idx.size()) / static_cast<double>(x.rows);
        node.leaf_value = leaf_stat(x, y, idx, task, n_classes);
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(node);

        const double node_impurity = impurity(y, idx, task, n_classes);
        if (depth >= config.max_depth || node_impurity <= 1e-12 ||
            idx.size() < static_cast<std::size_t>(config.min_samples_split))
            return id;

        // best split: maximum impurity decrease; ties go to the first
        // (feature, threshold) pair. Zero-gain splits are allowed so long as
        // the node is impure and both children are non-empty.
        bool found = false;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        double best_gain = -1.0;
        for (std::size_t f = 0; f < x.cols; ++f) {
            std::vector<std::size_t> order = idx;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x.at(a, f) < x.at(b, f);
            });
            for (std::size_t i = 1; i < order.size(); ++i) {
                const double lo = x.at(order[i - 1], f);
                const double hi = x.at(order[i], f);
                if (hi <= lo) continue;
                const double threshold = 0.5 * (lo + hi);
                std::vector<std::size_t> left, right;
                for (auto r : idx)
                    (x.at(r, f) < threshold ? left : right).push_back(r);
                if (left.empty() || right.empty()) continue;
                const double wl = static_cast<double>(left.size()) / static_cast<double>(idx.size());
                const double gain = node_impurity -
                                    wl * impurity(y, left, task, n_classes) -
                                    (1.0 - wl) * impurity(y, right, task, n_classes);
                if (!found || gain > best_gain + 1e-15) {
                    found = true;
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = threshold;
                }
            }
        }
        if (!found) return id;

        std::vector<std::size_t> left, right;
        for (auto r : idx)
            (x.at(r, best_feature) < best_threshold ? left : right).push_back(r);
        tree.nodes[static_cast<std::size_t>(id)].feature = static_cast<int>(best_feature);
        tree.nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
        const int l = build(std::move(left), depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].left = l;
        const int r = build(std::move(right), depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }
};

nlohmann::json tree_to_json(const TreeModel& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
        nlohmann::json jn;
        jn["feature"] = n.feature;
        jn["threshold"] = n.threshold;
        jn["left"] = n.left;
        jn["right"] = n.right;
        jn["train_fraction"] = n.train_fraction;
        jn["leaf_value"] = n.leaf_value;
        nodes.push_back(jn);
    }
    nlohmann::json j;
    j["nodes"] = nodes;
    j["n_features"] = t.n_features;
    j["max_depth"] = t.max_depth;
    return j;
}

TreeModel tree_from_json(const nlohmann::json& j) {
    TreeModel t;
    for (const auto& jn : j.at("nodes")) {
        TreeNode n;
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.train_fraction = jn.at("train_fraction").get<double>();
        n.leaf_value = jn.at("leaf_value").get<std::vector<double>>();
        t.nodes.push_back(std::move(n));
    }
    t.n_features = j.at("n_features").get<std::size_t>();
    t.max_depth = j.at("max_depth").get<int>();
    return t;
}

}  // namespace

ModelHandle make_tree_handle(TreeModel m, Task task) {
    auto shared = std::make_shared<const TreeModel>(std::move(m));
    ModelHandle h;
    h.task = task;
    h.n_outputs = shared->nodes.empty() ? 1 : shared->nodes[0].leaf_value.size();
    h.input_dim = shared->n_features;
    h.glass_tree = true;
    h.tree = shared;
    h.kind = "tree";
    h.predict_fn = [shared](const Matrix& x) {
        const std::size_t k = shared->nodes[0].leaf_value.size();
        Matrix out(x.rows, k);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const auto& leaf = shared->nodes[shared->route(x.row(r))].leaf_value;
            std::copy(leaf.begin(), leaf.end(), out.row(r).begin());
        }
        return out;
    };
    h.params = tree_to_json(*shared);
    h.params["task"] = task_name(task);
    return h;
}

// ---------------------------------------------------------------------------
// MLP

namespace {

// Forward pass storing post-activation values per layer (activations[0] = input).
std::vector<std::vector<double>> mlp_forward(const MlpModel& m, std::span<const double> x) {
    std::vector<std::vector<double>> acts;
    acts.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const Matrix& w = m.weights[l];
        std::vector<double> z(w.rows);
        for (std::size_t o = 0; o < w.rows; ++o) {
            double s = m.biases[l][o];
            for (std::size_t i = 0; i < w.cols; ++i) s += w.at(o, i) * acts.back()[i];
            z[o] = s;
        }
        if (l + 1 < m.weights.size())
            for (double& v : z) v = std::tanh(v);
        acts.push_back(std::move(z));
    }
    return acts;
}

// Gradient of raw output k with respect to the input.
std::vector<double> mlp_input_gradient(const MlpModel& m, std::span<const double> x,
                                       std::size_t k) {
    const auto acts = mlp_forward(m, x);
    const std::size_t layers = m.weights.size();
    std::vector<double> delta(m.weights.back().rows, 0.0);
    delta[k] = 1.0;
    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& w = m.weights[l];
        std::vector<double> prev(w.cols, 0.0);
        for (std::size_t i = 0; i < w.cols; ++i)
            for (std::size_t o = 0; o < w.rows; ++o) prev[i] += w.at(o, i) * delta[o];
        if (l > 0)
            for (std::size_t i = 0; i < w.cols; ++i)
                prev[i] *= 1.0 - acts[l][i] * acts[l][i];  // tanh'
        delta = std::move(prev);
    }
    return delta;
}

nlohmann::json mlp_to_json(const MlpModel& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        nlohmann::json jl;
        jl["rows"] = m.weights[l].rows;
        jl["cols"] = m.weights[l].cols;
        jl["weights"] = m.weights[l].data;
        jl["bias"] = m.biases[l];
        layers.push_back(jl);
    }
    return nlohmann::json{{"layers", layers}};
}

MlpModel mlp_from_json(const nlohmann::json& j) {
    MlpModel m;
    for (const auto& jl : j.at("layers")) {
        Matrix w(jl.at("rows").get<std::size_t>(), jl.at("cols").get<std::size_t>());
        w.data = jl.at("weights").get<std::vector<double>>();
        m.weights.push_back(std::move(w));
        m.biases.push_back(jl.at("bias").get<std::vector<double>>());
    }
    return m;
}

}  // namespace

ModelHandle make_mlp_handle(MlpModel m, Task task, bool softmax) {
    auto shared = std::make_shared<const MlpModel>(std::move(m));
    ModelHandle h;
    h.task = task;
    h.n_outputs = shared->weights.back().rows;
    h.input_dim = shared->weights.front().cols;
    h.softmax = softmax;
    h.differentiable = true;
    h.kind = "mlp";
    h.predict_fn = [shared](const Matrix& x) {
        Matrix out(x.rows, shared->weights.back().rows);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const auto acts = mlp_forward(*shared, x.row(r));
            std::copy(acts.back().begin(), acts.back().end(), out.row(r).begin());
        }
        return out;
    };
    h.gradient_fn = [shared](std::span<const double> x, std::size_t k) {
        return mlp_input_gradient(*shared, x, k);
    };
    h.params = mlp_to_json(*shared);
    h.params["task"] = task_name(task);
    h.params["softmax"] = softmax;
    return h;
}

// ---------------------------------------------------------------------------
// Training

namespace {

ModelHandle make_constant_handle(std::vector<double> output, Task task, std::size_t input_dim) {
    ModelHandle h;
    h.task = task;
    h.n_outputs = output.size();
    h.input_dim = input_dim;
    h.differentiable = true;
    h.constant_warning = true;
    h.kind = "constant";
    auto row = std::make_shared<const std::vector<double>>(std::move(output));
    h.predict_fn = [row](const Matrix& x) {
        Matrix out(x.rows, row->size());
        for (std::size_t r = 0; r < x.rows; ++r)
            std::copy(row->begin(), row->end(), out.row(r).begin());
        return out;
    };
    h.gradient_fn = [](std::span<const double> x, std::size_t) {
        return std::vector<double>(x.size(), 0.0);
    };
    h.params = nlohmann::json{{"output", *row},
                              {"task", task_name(h.task)},
                              {"input_dim", input_dim}};
    return h;
}

std::size_t count_classes(const std::vector<double>& y) {
    double m = 0.0;
    for (double v : y) m = std::max(m, v);
    return static_cast<std::size_t>(m) + 1;
}

LinearModel train_logistic(const Matrix& x, const std::vector<double>& y,
                           std::size_t n_classes, const TrainConfig& config) {
    const std::size_t n = x.rows, d = x.cols;
    LinearModel m{Matrix(n_classes, d), std::vector<double>(n_classes, 0.0)};
    for (int iter = 0; iter < config.max_iters; ++iter) {
        Matrix gw(n_classes, d);
        std::vector<double> gb(n_classes, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            std::vector<double> z(n_classes);
            for (std::size_t k = 0; k < n_classes; ++k) {
                double s = m.bias[k];
                for (std::size_t c = 0; c < d; ++c) s += m.weights.at(k, c) * x.at(r, c);
                z[k] = s;
            }
            softmax_row(z);
            z[static_cast<std::size_t>(y[r])] -= 1.0;
            for (std::size_t k = 0; k < n_classes; ++k) {
                gb[k] += z[k];
                for (std::size_t c = 0; c < d; ++c) gw.at(k, c) += z[k] * x.at(r, c);
            }
        }
        double norm = 0.0;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < n_classes; ++k) {
            m.bias[k] -= config.learning_rate * gb[k] * inv_n;
            norm += gb[k] * gb[k];
            for (std::size_t c = 0; c < d; ++c) {
                m.weights.at(k, c) -= config.learning_rate * gw.at(k, c) * inv_n;
                norm += gw.at(k, c) * gw.at(k, c);
            }
        }
        if (std::sqrt(norm) * inv_n < config.tolerance) break;
    }
    return m;
}

MlpModel init_mlp(std::size_t input_dim, std::size_t n_outputs, const TrainConfig& config) {
    Rng rng(config.seed);
    MlpModel m;
    std::vector<std::size_t> sizes;
    sizes.push_back(input_dim);
    for (auto h : config.hidden_sizes) sizes.push_back(h);
    sizes.push_back(n_outputs);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Matrix w(sizes[l + 1], sizes[l]);
        const double scale = std::sqrt(1.0 / static_cast<double>(sizes[l]));
        for (double& v : w.data) v = rng.uniform(-scale, scale);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(sizes[l + 1], 0.0);
    }
    return m;
}

MlpModel train_mlp(const Matrix& x, const std::vector<double>& y, std::size_t n_outputs,
                   bool classification, const TrainConfig& config) {
    MlpModel m = init_mlp(x.cols, n_outputs, config);
    const std::size_t n = x.rows;
    const std::size_t layers = m.weights.size();
    for (int iter = 0; iter < config.max_iters; ++iter) {
        std::vector<Matrix> gw;
        std::vector<std::vector<double>> gb;
        for (std::size_t l = 0; l < layers; ++l) {
            gw.emplace_back(m.weights[l].rows, m.weights[l].cols);
            gb.emplace_back(m.weights[l].rows, 0.0);
        }
        for (std::size_t r = 0; r < n; ++r) {
            const auto acts = mlp_forward(m, x.row(r));
            std::vector<double> delta = acts.back();
            if (classification) {
                softmax_row(delta);
                delta[static_cast<std::size_t>(y[r])] -= 1.0;
            } else {
                delta[0] -= y[r];
            }
            for (std::size_t l = layers; l-- > 0;) {
                for (std::size_t o = 0; o < m.weights[l].rows; ++o) {
                    gb[l][o] += delta[o];
                    for (std::size_t i = 0; i < m.weights[l].cols; ++i)
                        gw[l].at(o, i) += delta[o] * acts[l][i];
                }
                if (l == 0) break;
                std::vector<double> prev(m.weights[l].cols, 0.0);
                for (std::size_t i = 0; i < m.weights[l].cols; ++i) {
                    for (std::size_t o = 0; o < m.weights[l].rows; ++o)
                        prev[i] += m.weights[l].at(o, i) * delta[o];
                    prev[i] *= 1.0 - acts[l][i] * acts[l][i];
                }
                delta = std::move(prev);
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        double norm = 0.0;
        for (std::size_t l = 0; l < layers; ++l) {
            for (std::size_t i = 0; i < gw[l].data.size(); ++i) {
                m.weights[l].data[i] -= config.learning_rate * gw[l].data[i] * inv_n;
                norm += gw[l].data[i] * gw[l].data[i];
            }
            for (std::size_t o = 0; o < gb[l].size(); ++o)
                m.biases[l][o] -= config.learning_rate * gb[l][o] * inv_n;
        }
        if (std::sqrt(norm) * inv_n < config.tolerance) break;
    }
    return m;
}

}  // namespace

ModelHandle train_builtin(const std::string& kind, const Matrix& x,
                          const std::vector<double>& targets, const TrainConfig& config) {
    if (x.rows == 0) throw data_error("train_builtin: empty training data");
    if (targets.size() != x.rows)
        throw data_error("train_builtin: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(x.rows) + " rows");

    const bool classification =
        kind == "logistic" || ((kind == "tree" || kind == "mlp") && config.task == Task::Classification);
    if (classification) {
        const std::size_t n_classes = count_classes(targets);
        bool single = true;
        for (double v : targets)
            if (v != targets[0]) { single = false; break; }
        if (single) {
            std::vector<double> out(std::max<std::size_t>(n_classes, 1), 0.0);
            out[static_cast<std::size_t>(targets[0])] = 1.0;
            return make_constant_handle(std::move(out), Task::Classification, x.cols);
        }
        if (kind == "logistic")
            return make_linear_handle(train_logistic(x, targets, n_classes, config),
                                      Task::Classification, true);
        if (kind == "tree") {
            TreeBuilder builder{x, targets, Task::Classification, n_classes, config, {}};
            builder.tree.n_features = x.cols;
            builder.tree.max_depth = config.max_depth;
            std::vector<std::size_t> all(x.rows);
            std::iota(all.begin(), all.end(), 0);
            builder.build(std::move(all), 0);
            return make_tree_handle(std::move(builder.tree), Task::Classification);
        }
        if (kind == "mlp")
            return make_mlp_handle(train_mlp(x, targets, n_classes, true, config),
                                   Task::Classification, true);
    } else {
        if (kind == "linear") {
            auto [bias, w] = least_squares(x, targets);
            LinearModel m{Matrix(1, x.cols), {bias}};
            m.weights.data = w;
            return make_linear_handle(std::move(m), Task::Regression, false);
        }
        if (kind == "tree") {
            TreeBuilder builder{x, targets, Task::Regression, 0, config, {}};
            builder.tree.n_features = x.cols;
            builder.tree.max_depth = config.max_depth;
            std::vector<std::size_t> all(x.rows);
            std::iota(all.begin(), all.end(), 0);
            builder.build(std::move(all), 0);
            return make_tree_handle(std::move(builder.tree), Task::Regression);
        }
        if (kind == "mlp")
            return make_mlp_handle(train_mlp(x, targets, 1, false, config), Task::Regression,
                                   false);
    }
    throw usage_error("train_builtin: unknown kind '" + kind + "'");
}

nlohmann::json model_to_json(const ModelHandle& h) {
    return nlohmann::json{{"kind", h.kind}, {"params", h.params}};
}

ModelHandle model_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const auto& p = j.at("params");
    if (kind == "linear" || kind == "logistic") {
        LinearModel m{Matrix(p.at("n_outputs").get<std::size_t>(),
                             p.at("input_dim").get<std::size_t>()),
                      p.at("bias").get<std::vector<double>>()};
        m.weights.data = p.at("weights").get<std::vector<double>>();
        return make_linear_handle(std::move(m), task_from_name(p.at("task").get<std::string>()),
                                  p.at("softmax").get<bool>());
    }
    if (kind == "tree")
        return make_tree_handle(tree_from_json(p), task_from_name(p.at("task").get<std::string>()));
    if (kind == "mlp")
        return make_mlp_handle(mlp_from_json(p), task_from_name(p.at("task").get<std::string>()),
                               p.at("softmax").get<bool>());
    if (kind == "constant") {
        ModelHandle h = make_constant_handle(p.at("output").get<std::vector<double>>(),
                                             task_from_name(p.at("task").get<std::string>()),
                                             p.at("input_dim").get<std::size_t>());
        return h;
    }
    throw model_error("model json: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Anomaly detector

ThresholdDetector fit_detector(const TimeseriesWindow& train, double kappa) {
    if (train.size() < 2) throw data_error("fit_detector: need at least 2 training points");
    if (kappa <= 0.0) throw data_error("fit_detector: kappa must be > 0");
    double mean = 0.0;
    for (double v : train.values) mean += v;
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (double v : train.values) var += (v - mean) * (v - mean);
    const double std = std::max(std::sqrt(var / static_cast<double>(train.size())), 1e-12);
    return ThresholdDetector{mean, std, kappa};
}

DetectionResult detect(const ThresholdDetector& d, const TimeseriesWindow& window) {
    DetectionResult res;
    res.deviations.reserve(window.size());
    for (double v : window.values) {
        const double dev = std::fabs(v - d.train_mean) / d.train_std;
        res.deviations.push_back(dev);
        res.score = std::max(res.score, dev);
    }
    res.is_anomaly = res.score > d.kappa;  // strict
    return res;
}

}  // namespace xai

#include "xai/engine.hpp"

#include <algorithm>

#include "xai/global_explainers.hpp"
#include "xai/insight.hpp"
#include "xai/local_attribution.hpp"
#include "xai/ts_explainers.hpp"

namespace xai {

const std::vector<ExplainerEntry>& explainer_registry() {
    static const std::vector<ExplainerEntry> registry = {
        {"correlation", ExplainerScope::Data, ModelRequirement::None, false},
        {"imbalance", ExplainerScope::Data, ModelRequirement::None, false},
        {"feature-selection", ExplainerScope::Data, ModelRequirement::None, false},
        {"pdp", ExplainerScope::Global, ModelRequirement::BlackBox, false},
        {"ale", ExplainerScope::Global, ModelRequirement::BlackBox, false},
        {"morris", ExplainerScope::Global, ModelRequirement::BlackBox, false},
        {"lime", ExplainerScope::Local, ModelRequirement::BlackBox, false},
        {"shap", ExplainerScope::Local, ModelRequirement::BlackBox, false},
        {"ig", ExplainerScope::Local, ModelRequirement::Differentiable, false},
        {"ce", ExplainerScope::Local, ModelRequirement::BlackBox, false},
        {"mace-greedy", ExplainerScope::Local, ModelRequirement::BlackBox, false},
        {"glass-linear", ExplainerScope::Local, ModelRequirement::GlassLinear, false},
        {"glass-tree", ExplainerScope::Local, ModelRequirement::GlassTree, false},
        {"ts-shap", ExplainerScope::Local, ModelRequirement::Detector, true},
        {"ts-ce", ExplainerScope::Local, ModelRequirement::Detector, true},
    };
    return registry;
}

std::vector<ExplainerEntry> resolve(const std::vector<std::string>& names,
                                    const ModelHandle* model, bool has_detector) {
    std::vector<ExplainerEntry> out;
    for (const auto& name : names) {
        const auto& registry = explainer_registry();
        const auto it = std::find_if(registry.begin(), registry.end(),
                                     [&](const ExplainerEntry& e) { return e.name == name; });
        if (it == registry.end()) {
            std::string valid;
            for (const auto& e : registry) {
                if (!valid.empty()) valid += ", ";
                valid += e.name;
            }
            throw usage_error("unknown explainer '" + name + "'; valid keys: " + valid);
        }
        switch (it->requirement) {
            case ModelRequirement::None:
                break;
            case ModelRequirement::Detector:
                if (!has_detector)
                    throw usage_error("explainer '" + name + "' requires a fitted detector");
                break;
            case ModelRequirement::BlackBox:
                if (!model) throw usage_error("explainer '" + name + "' requires a model");
                break;
            case ModelRequirement::Differentiable:
                if (!model || !model->differentiable)
                    throw usage_error("explainer '" + name +
                                      "' requires the differentiable capability");
                break;
            case ModelRequirement::GlassLinear:
                if (!model || !model->glass_linear)
                    throw usage_error("explainer '" + name +
                                      "' requires the glass-linear capability");
                break;
            case ModelRequirement::GlassTree:
                if (!model || !model->glass_tree)
                    throw usage_error("explainer '" + name +
                                      "' requires the glass-tree capability");
                break;
        }
        out.push_back(*it);
    }
    return out;
}

ExplainerSet make_explainer_set(const std::vector<std::string>& names, const ModelHandle* model,
                                const FittedTransform* transform, const TabularBatch* train,
                                const ThresholdDetector* detector,
                                const nlohmann::json& params, std::uint64_t seed) {
    ExplainerSet set;
    set.entries = resolve(names, model, detector != nullptr);
    set.model = model;
    set.transform = transform;
    set.train = train;
    set.detector = detector;
    set.params = params;
    set.seed = seed;
    return set;
}

namespace {

nlohmann::json params_for(const ExplainerSet& set, const std::string& name) {
    if (set.params.is_object() && set.params.contains(name)) return set.params[name];
    return nlohmann::json::object();
}

nlohmann::json error_record(const std::string& msg) {
    return nlohmann::json{{"error", msg}};
}

// Bundle assembly follows registry order regardless of request order.
std::vector<ExplainerEntry> in_registry_order(const std::vector<ExplainerEntry>& entries) {
    std::vector<ExplainerEntry> out;
    for (const auto& reg : explainer_registry())
        if (std::any_of(entries.begin(), entries.end(),
                        [&](const ExplainerEntry& e) { return e.name == reg.name; }))
            out.push_back(reg);
    return out;
}

nlohmann::json base_metadata(const ExplainerSet& set) {
    nlohmann::json meta;
    meta["seed"] = set.seed;
    meta["version"] = "1";
    meta["timings_ms"] = 0;  // canonical zero; bundles must be byte-stable
    return meta;
}

// Explained output: the predicted class for classification, output 0 otherwise.
std::size_t explained_output(const TabularPredictor& predictor, const std::vector<Cell>& row) {
    if (predictor.model->task != Task::Classification || predictor.model->n_outputs < 2) return 0;
    const auto probs = predictor.predict_row(row);
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best]) best = i;
    return best;
}

nlohmann::json run_local_entry(const ExplainerSet& set, const ExplainerEntry& entry,
                               const std::vector<Cell>& instance) {
    TabularPredictor predictor{set.model, set.transform};
    const auto p = params_for(set, entry.name);
    const std::size_t k = explained_output(predictor, instance);
    if (entry.name == "lime") {
        const auto n = p.value("n_samples", 2000);
        const auto top_k = p.value("top_k", static_cast<int>(set.transform->schema.n_columns()));
        return attribution_to_json(lime_explain(predictor, *set.train, instance, k,
                                                static_cast<std::size_t>(n),
                                                static_cast<std::size_t>(top_k), set.seed));
    }
    if (entry.name == "shap") {
        const auto n = p.value("n_coalitions", 256);
        return attribution_to_json(kernel_shap(predictor, *set.train, instance, k,
                                               static_cast<std::size_t>(n), set.seed));
    }
    if (entry.name == "ig") {
        const auto steps = p.value("steps", 256);
        // baseline: transformed train mean
        const Matrix train_t = transform(*set.transform, *set.train);
        std::vector<double> baseline(train_t.cols, 0.0);
        for (std::size_t r = 0; r < train_t.rows; ++r)
            for (std::size_t c = 0; c < train_t.cols; ++c) baseline[c] += train_t.at(r, c);
        for (double& b : baseline) b /= static_cast<double>(train_t.rows);
        return attribution_to_json(integrated_gradients(*set.model, *set.transform, instance,
                                                        baseline,
                                                        static_cast<std::size_t>(steps), k));
    }
    if (entry.name == "ce" || entry.name == "mace-greedy") {
        CFProblem problem;
        problem.instance = instance;
        if (p.contains("target_class"))
            problem.target_class = p["target_class"].get<std::size_t>();
        if (p.contains("immutable"))
            for (const auto& f : p["immutable"]) problem.immutable.insert(f.get<std::string>());
        if (entry.name == "ce") {
            WachterConfig config;
            config.steps = p.value("steps", 500);
            config.learning_rate = p.value("learning_rate", 0.05);
            config.seed = set.seed;
            return counterfactual_to_json(wachter_ce(predictor, problem, config));
        }
        MaceConfig config;
        config.max_changed_features = p.value("max_changed_features", 3);
        config.n_examples = p.value("n_examples", 1);
        config.seed = set.seed;
        return counterfactual_to_json(mace_cf(predictor, *set.train, problem, config));
    }
    if (entry.name == "glass-linear")
        return attribution_to_json(glass_linear_explain(*set.model, *set.transform, instance, k));
    if (entry.name == "glass-tree")
        return decision_path_to_json(glass_tree_explain(*set.model, *set.transform, instance));
    throw usage_error("explainer '" + entry.name + "' is not a tabular local explainer");
}

}  // namespace

ExplanationBundle explain_local(const ExplainerSet& set, const TabularBatch& instances) {
    instances.validate();
    ExplanationBundle bundle;
    bundle.instances = instances;
    bundle.metadata = base_metadata(set);
    for (const auto& entry : in_registry_order(set.entries)) {
        if (entry.scope != ExplainerScope::Local || entry.timeseries) continue;
        nlohmann::json results = nlohmann::json::array();
        for (std::size_t r = 0; r < instances.n_rows(); ++r) {
            try {
                const auto row = feature_row(*set.transform, instances, r);
                results.push_back(run_local_entry(set, entry, row));
            } catch (const std::exception& e) {
                results.push_back(error_record(e.what()));
            }
        }
        bundle.local.emplace_back(entry.name, std::move(results));
    }
    return bundle;
}

ExplanationBundle explain_local_ts(const ExplainerSet& set,
                                   const std::vector<TimeseriesWindow>& windows) {
    ExplanationBundle bundle;
    bundle.ts_instances = windows;
    bundle.metadata = base_metadata(set);
    for (const auto& entry : in_registry_order(set.entries)) {
        if (!entry.timeseries) continue;
        nlohmann::json results = nlohmann::json::array();
        for (const auto& window : windows) {
            try {
                const auto p = params_for(set, entry.name);
                const double reference = p.value("reference", set.detector->train_mean);
                if (entry.name == "ts-shap") {
                    TsShapConfig config;
                    config.n_segments = p.value("segments", std::min<std::size_t>(8, window.size()));
                    config.seed = set.seed;
                    const ThresholdDetector detector = *set.detector;
                    auto score = [detector](const TimeseriesWindow& w) {
                        return detect(detector, w).score;
                    };
                    results.push_back(ts_attribution_to_json(
                        ts_shap(score, window, reference, config)));
                } else if (entry.name == "ts-ce") {
                    TsCfConfig config;
                    config.n_segments = p.value("segments", std::min<std::size_t>(8, window.size()));
                    config.max_modified_fraction = p.value("max_modified_fraction", 0.5);
                    config.seed = set.seed;
                    results.push_back(ts_cf_to_json(ts_counterfactual(
                        *set.detector, window,
                        std::vector<double>(window.size(), reference), config)));
                }
            } catch (const std::exception& e) {
                results.push_back(error_record(e.what()));
            }
        }
        bundle.local.emplace_back(entry.name, std::move(results));
    }
    return bundle;
}

ExplanationBundle explain_global(const ExplainerSet& set) {
    ExplanationBundle bundle;
    bundle.metadata = base_metadata(set);
    for (const auto& entry : in_registry_order(set.entries)) {
        if (entry.scope == ExplainerScope::Local) continue;
        nlohmann::json result;
        try {
            const auto p = params_for(set, entry.name);
            if (entry.name == "correlation") {
                result = correlation_to_json(correlation_matrix(*set.train));
            } else if (entry.name == "imbalance") {
                if (!set.train->schema.target)
                    throw data_error("imbalance: training schema has no target");
                std::optional<std::string> by;
                if (p.contains("by")) by = p["by"].get<std::string>();
                result = imbalance_to_json(
                    class_imbalance(*set.train, *set.train->schema.target, by));
            } else if (entry.name == "feature-selection") {
                if (!set.train->schema.target)
                    throw data_error("feature-selection: training schema has no target");
                const auto k = p.value("k", static_cast<int>(set.train->schema.n_columns() - 1));
                result = feature_selection_to_json(select_features(
                    *set.train, *set.train->schema.target, static_cast<std::size_t>(k)));
            } else if (entry.name == "pdp" || entry.name == "ale") {
                TabularPredictor predictor{set.model, set.transform};
                std::vector<std::string> features;
                if (p.contains("features"))
                    for (const auto& f : p["features"]) features.push_back(f.get<std::string>());
                else
                    for (const auto& c : set.transform->schema.columns) {
                        if (entry.name == "ale" && c.kind != ColumnKind::Continuous) continue;
                        features.push_back(c.name);
                    }
                nlohmann::json curves = nlohmann::json::array();
                for (const auto& f : features) {
                    if (entry.name == "pdp") {
                        const auto g = p.value("grid_size", 20);
                        curves.push_back(pdp_to_json(
                            pdp(predictor, *set.train, f, static_cast<std::size_t>(g))));
                    } else {
                        const auto b = p.value("bins", 10);
                        curves.push_back(ale_to_json(
                            ale(predictor, *set.train, f, static_cast<std::size_t>(b))));
                    }
                }
                result = nlohmann::json{{"explainer", entry.name}, {"curves", curves}};
            } else if (entry.name == "morris") {
                const FittedTransform& ft = *set.transform;
                std::vector<std::string> names;
                std::vector<std::pair<double, double>> bounds;
                if (ft.output_width() != ft.columns.size())
                    throw data_error("morris: categorical features present");
                for (const auto& fc : ft.columns) {
                    if (fc.kind != ColumnKind::Continuous)
                        throw data_error("morris: categorical features present");
                    names.push_back(fc.name);
                }
                // bounds in transformed space from train min/max
                const Matrix train_t = transform(ft, *set.train);
                for (std::size_t c = 0; c < train_t.cols; ++c) {
                    double lo = train_t.at(0, c), hi = train_t.at(0, c);
                    for (std::size_t r = 1; r < train_t.rows; ++r) {
                        lo = std::min(lo, train_t.at(r, c));
                        hi = std::max(hi, train_t.at(r, c));
                    }
                    bounds.emplace_back(lo, hi);
                }
                result = sensitivity_to_json(morris(*set.model, names, bounds,
                                                    p.value("r", 10), p.value("p", 4), set.seed,
                                                    p.value("output_index", 0)));
            }
        } catch (const std::exception& e) {
            result = error_record(e.what());
        }
        bundle.global.emplace_back(entry.name, std::move(result));
    }
    return bundle;
}

void merge_bundle(ExplanationBundle& a, ExplanationBundle b) {
    if (!a.instances && b.instances) a.instances = std::move(b.instances);
    if (a.ts_instances.empty()) a.ts_instances = std::move(b.ts_instances);
    for (auto& kv : b.local) a.local.push_back(std::move(kv));
    for (auto& kv : b.global) a.global.push_back(std::move(kv));
    if (a.metadata.is_null()) a.metadata = std::move(b.metadata);
}

}  // namespace xai

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xai/counterfactual.hpp"
#include "xai/model.hpp"
#include "xai/predictor.hpp"
#include "xai/tabular.hpp"
#include "xai/timeseries.hpp"

namespace xai {

enum class ExplainerScope { Local, Global, Data };
enum class ModelRequirement { BlackBox, Differentiable, GlassLinear, GlassTree, Detector, None };

struct ExplainerEntry {
    std::string name;
    ExplainerScope scope = ExplainerScope::Local;
    ModelRequirement requirement = ModelRequirement::BlackBox;
    bool timeseries = false;
};

// The registry in canonical order; names are the CLI keys.
const std::vector<ExplainerEntry>& explainer_registry();

// Resolves names to entries; unknown keys list the valid ones, unmet
// capability requirements name the missing capability. Checks happen here,
// never mid-run.
std::vector<ExplainerEntry> resolve(const std::vector<std::string>& names,
                                    const ModelHandle* model, bool has_detector);

struct ExplainerSet {
    std::vector<ExplainerEntry> entries;
    const ModelHandle* model = nullptr;
    const FittedTransform* transform = nullptr;
    const TabularBatch* train = nullptr;
    const ThresholdDetector* detector = nullptr;
    const TimeseriesWindow* train_window = nullptr;
    nlohmann::json params;  // per-explainer option objects keyed by name
    std::uint64_t seed = 0;
};

ExplainerSet make_explainer_set(const std::vector<std::string>& names, const ModelHandle* model,
                                const FittedTransform* transform, const TabularBatch* train,
                                const ThresholdDetector* detector,
                                const nlohmann::json& params, std::uint64_t seed);

struct ExplanationBundle {
    std::optional<TabularBatch> instances;
    std::vector<TimeseriesWindow> ts_instances;
    // entry name -> array of per-instance results (local) or one result
    // (global); explainer failures become {"error": ...} records in place.
    std::vector<std::pair<std::string, nlohmann::json>> local;
    std::vector<std::pair<std::string, nlohmann::json>> global;
    nlohmann::json metadata;
};

// Runs every local-scope tabular entry on every instance. One explainer's
// failure is recorded per entry/instance without aborting the others.
ExplanationBundle explain_local(const ExplainerSet& set, const TabularBatch& instances);

// Time-series counterpart over windows (ts-shap, ts-ce).
ExplanationBundle explain_local_ts(const ExplainerSet& set,
                                   const std::vector<TimeseriesWindow>& windows);

// Runs global- and data-scope entries.
ExplanationBundle explain_global(const ExplainerSet& set);

// Merges the sections of b into a (used to combine local+global runs).
void merge_bundle(ExplanationBundle& a, ExplanationBundle b);

}  // namespace xai

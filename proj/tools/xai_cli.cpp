#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xai/engine.hpp"
#include "xai/error.hpp"
#include "xai/model.hpp"
#include "xai/preprocess.hpp"
#include "xai/report.hpp"
#include "xai/subprocess_model.hpp"

namespace {

using namespace xai;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
    if (!path) {
        std::cout << text;
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + *path);
    out << text;
}

nlohmann::json parse_json_file(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw data_error("invalid JSON in " + path);
    return j;
}

// Loads a CSV against a sidecar schema; CSV columns are matched to schema
// columns by header name and may appear in any order or be a subset (the
// instances file usually omits the target column).
TabularBatch load_batch(const std::string& csv_path, const TabularSchema& schema) {
    const auto cells = parse_csv(read_file(csv_path));
    if (cells.empty()) throw data_error(csv_path + ": empty CSV");
    const auto& header = cells.front();

    TabularSchema sub;
    std::vector<std::size_t> schema_of_col;
    for (const auto& name : header) {
        const auto idx = schema.column_index(name);
        if (!idx) throw data_error(csv_path + ": column '" + name + "' not in schema");
        schema_of_col.push_back(*idx);
    }
    // Keep schema order for the batch columns.
    std::vector<std::size_t> col_order(header.size());
    for (std::size_t i = 0; i < col_order.size(); ++i) col_order[i] = i;
    std::sort(col_order.begin(), col_order.end(),
              [&](std::size_t a, std::size_t b) { return schema_of_col[a] < schema_of_col[b]; });
    for (std::size_t i : col_order) sub.columns.push_back(schema.columns[schema_of_col[i]]);
    if (schema.target && sub.column_index(*schema.target)) sub.target = schema.target;
    sub.validate();

    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 1; r < cells.size(); ++r) {
        if (cells[r].size() != header.size())
            throw data_error(csv_path + ": row " + std::to_string(r) + " has " +
                             std::to_string(cells[r].size()) + " cells, expected " +
                             std::to_string(header.size()));
        std::vector<std::string> row;
        for (std::size_t i : col_order) row.push_back(cells[r][i]);
        rows.push_back(std::move(row));
    }
    return make_tabular(sub, rows);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::uint64_t effective_seed(std::optional<std::uint64_t> cli_seed) {
    if (cli_seed) return *cli_seed;
    if (const char* env = std::getenv("XAI_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw usage_error("XAI_SEED is not a valid unsigned integer");
        }
    }
    return 0;
}

// A model fault captured per-instance still makes the run fail: report the
// first message on stderr and signal a model error to the caller.
std::optional<std::string> first_error(const ExplanationBundle& bundle) {
    for (const auto& [name, results] : bundle.local) {
        const auto scan = [](const nlohmann::json& r) -> std::optional<std::string> {
            if (r.is_object() && r.contains("error") && r["error"].is_string())
                return r["error"].get<std::string>();
            return std::nullopt;
        };
        if (results.is_array()) {
            for (const auto& r : results)
                if (auto msg = scan(r)) return msg;
        } else if (auto msg = scan(results)) {
            return msg;
        }
    }
    return std::nullopt;
}

bool has_not_found(const ExplanationBundle& bundle) {
    for (const auto& [name, results] : bundle.local) {
        const auto scan = [](const nlohmann::json& r) {
            return r.is_object() && r.contains("found") && r["found"].is_boolean() &&
                   !r["found"].get<bool>();
        };
        if (results.is_array()) {
            for (const auto& r : results)
                if (scan(r)) return true;
        } else if (scan(results)) {
            return true;
        }
    }
    return false;
}

int cmd_analyze(const std::string& data, const std::string& schema_path,
                const std::optional<std::string>& out) {
    const auto schema = schema_from_json(parse_json_file(schema_path));
    const auto batch = load_batch(data, schema);
    std::vector<std::string> names = {"correlation"};
    if (batch.schema.target) {
        names.push_back("imbalance");
        names.push_back("feature-selection");
    }
    auto set = make_explainer_set(names, nullptr, nullptr, &batch, nullptr,
                                  nlohmann::json::object(), 0);
    auto bundle = explain_global(set);
    nlohmann::json echo{{"command", "analyze"}, {"explainers", names}};
    write_output(out, xai::to_json(bundle, echo));
    return 0;
}

int cmd_train(const std::string& kind, const std::string& data, const std::string& schema_path,
              const std::optional<std::string>& target, const std::string& out,
              std::optional<std::uint64_t> seed) {
    auto schema = schema_from_json(parse_json_file(schema_path));
    if (target) schema.target = *target;
    if (!schema.target) throw usage_error("train: no target column (use --target or schema)");
    schema.validate();
    const auto batch = load_batch(data, schema);
    if (!batch.schema.target)
        throw data_error("train: target column '" + *schema.target + "' absent from data");

    const auto ft = fit_transform_spec(TransformSpec::standard(), batch);
    TrainConfig config;
    config.seed = effective_seed(seed);
    const auto& tcol = batch.schema.columns[*batch.schema.column_index(*batch.schema.target)];
    config.task = tcol.kind == ColumnKind::Categorical ? Task::Classification : Task::Regression;
    const auto model =
        train_builtin(kind, transform(ft, batch), target_vector(batch), config);

    nlohmann::json doc;
    doc["model"] = model_to_json(model);
    doc["transform"] = transform_to_json(ft);
    write_output(out, canonical_dump(doc));
    if (model.constant_warning)
        std::cerr << "warning: single-class training target; model is constant\n";
    return 0;
}

int cmd_explain(const std::string& data, const std::string& schema_path,
                const std::optional<std::string>& model_path,
                const std::optional<std::string>& model_cmd, const std::string& explainers,
                const std::string& instances_path, const std::optional<std::string>& params_path,
                std::optional<std::uint64_t> seed, const std::optional<std::string>& out) {
    if (model_path.has_value() == model_cmd.has_value())
        throw usage_error("explain: exactly one of --model / --model-cmd is required");
    const auto schema = schema_from_json(parse_json_file(schema_path));
    const auto train = load_batch(data, schema);

    nlohmann::json params = nlohmann::json::object();
    if (params_path) {
        params = parse_json_file(*params_path);
        if (!params.is_object()) throw usage_error("--params: expected a JSON object");
    }

    TransformSpec tspec = TransformSpec::standard();
    if (params.contains("transform")) tspec = transform_spec_from_json(params["transform"]);
    FittedTransform ft;

    ModelHandle model;
    if (model_path) {
        const auto doc = parse_json_file(*model_path);
        if (doc.contains("model")) {
            model = model_from_json(doc["model"]);
            if (doc.contains("transform") && !params.contains("transform"))
                ft = transform_from_json(doc["transform"]);
            else
                ft = fit_transform_spec(tspec, train);
        } else {
            model = model_from_json(doc);
            ft = fit_transform_spec(tspec, train);
        }
    } else {
        model = spawn_external(*model_cmd);
        ft = fit_transform_spec(tspec, train);
    }

    const auto instances = load_batch(instances_path, schema);
    const auto names = split_list(explainers);
    if (names.empty()) throw usage_error("--explainers: empty list");
    const std::uint64_t s = effective_seed(seed);

    auto set = make_explainer_set(names, &model, &ft, &train, nullptr, params, s);
    auto bundle = explain_local(set, instances);
    merge_bundle(bundle, explain_global(set));
    bundle.instances = instances;

    nlohmann::json echo{{"command", "explain"},
                        {"explainers", names},
                        {"seed", s},
                        {"params", params}};
    write_output(out, xai::to_json(bundle, echo));
    if (const auto msg = first_error(bundle)) {
        std::cerr << "error: " << *msg << "\n";
        return int(ErrorKind::Model);
    }
    return has_not_found(bundle) ? 5 : 0;
}

int cmd_explain_ts(const std::string& train_path, const std::string& window_path, double kappa,
                   const std::string& explainers, const std::optional<std::string>& params_path,
                   std::optional<std::uint64_t> seed, const std::optional<std::string>& out) {
    const auto train = timeseries_from_csv(read_file(train_path), "train");
    const auto window = timeseries_from_csv(read_file(window_path), "window");
    const auto detector = fit_detector(train, kappa);

    nlohmann::json params = nlohmann::json::object();
    if (params_path) {
        params = parse_json_file(*params_path);
        if (!params.is_object()) throw usage_error("--params: expected a JSON object");
    }
    const auto names = split_list(explainers);
    if (names.empty()) throw usage_error("--explainers: empty list");
    const std::uint64_t s = effective_seed(seed);

    auto set = make_explainer_set(names, nullptr, nullptr, nullptr, &detector, params, s);
    set.train_window = &train;
    auto bundle = explain_local_ts(set, {window});

    nlohmann::json echo{{"command", "explain-ts"},
                        {"explainers", names},
                        {"kappa", kappa},
                        {"seed", s}};
    write_output(out, xai::to_json(bundle, echo));
    if (const auto msg = first_error(bundle)) {
        std::cerr << "error: " << *msg << "\n";
        return int(ErrorKind::Model);
    }
    return has_not_found(bundle) ? 5 : 0;
}

int cmd_report(const std::string& bundle_path, const std::string& out,
               const std::string& title) {
    const auto doc = parse_json_file(bundle_path);
    bundle_from_document(doc);  // validates schema_version and shape
    ReportSpec spec;
    spec.document = doc;
    if (!title.empty()) spec.title = title;
    write_output(out, render_report(spec));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-agnostic explanation toolkit for tabular and time-series data"};
    app.require_subcommand(1);

    std::string data, schema_path, kind, explainers, instances_path, window_path, bundle_path;
    std::string train_out, report_out, title;
    std::optional<std::string> out, model_path, model_cmd, params_path, target;
    std::optional<std::uint64_t> seed;
    double kappa = 3.0;

    auto* analyze = app.add_subcommand("analyze", "Data insight explainers over a CSV dataset");
    analyze->add_option("--data", data, "training CSV")->required();
    analyze->add_option("--schema", schema_path, "schema JSON sidecar")->required();
    analyze->add_option("--out", out, "output path (default: stdout)");

    auto* train = app.add_subcommand("train", "Train a built-in model");
    train->add_option("--kind", kind, "linear|logistic|tree|mlp")->required();
    train->add_option("--data", data, "training CSV")->required();
    train->add_option("--schema", schema_path, "schema JSON sidecar")->required();
    train->add_option("--target", target, "target column (overrides schema)");
    train->add_option("--out", train_out, "model JSON output path")->required();
    train->add_option("--seed", seed, "training seed (XAI_SEED fallback)");

    auto* explain = app.add_subcommand("explain", "Run explainers over instances");
    explain->add_option("--data", data, "training CSV")->required();
    explain->add_option("--schema", schema_path, "schema JSON sidecar")->required();
    explain->add_option("--model", model_path, "model JSON from `train`");
    explain->add_option("--model-cmd", model_cmd, "external model command (JSON-line protocol)");
    explain->add_option("--explainers", explainers, "comma-separated explainer keys")->required();
    explain->add_option("--instances", instances_path, "instances CSV")->required();
    explain->add_option("--params", params_path, "per-explainer options JSON");
    explain->add_option("--seed", seed, "seed (XAI_SEED fallback)");
    explain->add_option("--out", out, "bundle JSON output path (default: stdout)");

    auto* explain_ts = app.add_subcommand("explain-ts", "Explain an anomaly detector's score");
    explain_ts->add_option("--train", data, "training series CSV")->required();
    explain_ts->add_option("--window", window_path, "window series CSV")->required();
    explain_ts->add_option("--kappa", kappa, "detector threshold")->required();
    explain_ts->add_option("--explainers", explainers, "ts-shap,ts-ce")->required();
    explain_ts->add_option("--params", params_path, "per-explainer options JSON");
    explain_ts->add_option("--seed", seed, "seed (XAI_SEED fallback)");
    explain_ts->add_option("--out", out, "bundle JSON output path (default: stdout)");

    auto* report = app.add_subcommand("report", "Render a bundle as a static HTML report");
    report->add_option("bundle", bundle_path, "bundle JSON")->required();
    report->add_option("--out", report_out, "HTML output path")->required();
    report->add_option("--title", title, "report title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(data, schema_path, out);
        if (app.got_subcommand(train))
            return cmd_train(kind, data, schema_path, target, train_out, seed);
        if (app.got_subcommand(explain))
            return cmd_explain(data, schema_path, model_path, model_cmd, explainers,
                               instances_path, params_path, seed, out);
        if (app.got_subcommand(explain_ts))
            return cmd_explain_ts(data, window_path, kappa, explainers, params_path, seed, out);
        if (app.got_subcommand(report)) return cmd_report(bundle_path, report_out, title);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}

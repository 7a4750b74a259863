#include "xai/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>

#include "xai/error.hpp"

namespace xai {

namespace {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json section_to_object(const std::vector<std::pair<std::string, nlohmann::json>>& s) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, value] : s) out[name] = value;
    return out;
}

std::vector<std::pair<std::string, nlohmann::json>> object_to_section(const nlohmann::json& obj) {
    // Restore registry order; unknown names follow alphabetically.
    std::vector<std::pair<std::string, nlohmann::json>> out;
    std::set<std::string> seen;
    for (const auto& entry : explainer_registry()) {
        if (obj.contains(entry.name)) {
            out.emplace_back(entry.name, obj.at(entry.name));
            seen.insert(entry.name);
        }
    }
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!seen.count(it.key())) out.emplace_back(it.key(), it.value());
    return out;
}

}  // namespace

std::string canonical_dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

nlohmann::json bundle_to_document(const ExplanationBundle& bundle,
                                  const nlohmann::json& config_echo) {
    nlohmann::json doc;
    doc["schema_version"] = "1";

    nlohmann::json dataset;
    nlohmann::json payload = nlohmann::json::array();
    if (bundle.instances) {
        dataset["row_count"] = bundle.instances->n_rows();
        nlohmann::json cols = nlohmann::json::array();
        for (const auto& c : bundle.instances->schema.columns) cols.push_back(c.name);
        dataset["columns"] = cols;
        payload.push_back(batch_to_json(*bundle.instances));
    } else if (!bundle.ts_instances.empty()) {
        dataset["row_count"] = bundle.ts_instances.size();
        dataset["columns"] = nlohmann::json::array({"timestamp", "value"});
        for (const auto& w : bundle.ts_instances) payload.push_back(timeseries_to_json(w));
    } else {
        dataset["row_count"] = 0;
        dataset["columns"] = nlohmann::json::array();
    }
    dataset["content_hash"] = fnv1a_hex(payload.dump());
    doc["dataset"] = dataset;

    doc["config"] = config_echo.is_null() ? nlohmann::json::object() : config_echo;
    if (bundle.instances) doc["instances"] = batch_to_json(*bundle.instances);
    if (!bundle.ts_instances.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& w : bundle.ts_instances) arr.push_back(timeseries_to_json(w));
        doc["ts_instances"] = arr;
    }
    doc["local"] = section_to_object(bundle.local);
    doc["global"] = section_to_object(bundle.global);
    doc["metadata"] = bundle.metadata.is_null() ? nlohmann::json::object() : bundle.metadata;
    return doc;
}

ExplanationBundle bundle_from_document(const nlohmann::json& doc) {
    if (!doc.is_object()) throw data_error("bundle document: not a JSON object");
    if (doc.value("schema_version", "") != "1")
        throw data_error("bundle document: unrecognized schema_version");
    ExplanationBundle b;
    if (doc.contains("instances")) b.instances = batch_from_json(doc.at("instances"));
    if (doc.contains("ts_instances"))
        for (const auto& w : doc.at("ts_instances")) b.ts_instances.push_back(timeseries_from_json(w));
    if (doc.contains("local")) b.local = object_to_section(doc.at("local"));
    if (doc.contains("global")) b.global = object_to_section(doc.at("global"));
    b.metadata = doc.value("metadata", nlohmann::json::object());
    return b;
}

std::string to_json(const ExplanationBundle& bundle, const nlohmann::json& config_echo) {
    return canonical_dump(bundle_to_document(bundle, config_echo));
}

// ---------------------------------------------------------------------------
// HTML report

namespace {

std::string esc(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    if (!std::isfinite(v)) return "-";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string num(const nlohmann::json& v) {
    if (v.is_number()) return num(v.get<double>());
    if (v.is_string()) return esc(v.get<std::string>());
    return esc(v.dump());
}

// Horizontal bar chart for feature scores; positive bars grow right from a
// center axis, negative grow left.
std::string svg_bars(const std::vector<std::pair<std::string, double>>& items) {
    const double w = 460, row_h = 22, label_w = 170, pad = 4;
    const double plot_w = w - label_w - 2 * pad;
    const double mid = label_w + pad + plot_w / 2;
    double max_abs = 1e-12;
    for (const auto& [_, s] : items) max_abs = std::max(max_abs, std::fabs(s));
    const double h = row_h * static_cast<double>(items.size()) + 2 * pad;
    std::ostringstream svg;
    svg << "<svg viewBox=\"0 0 " << w << " " << h << "\" width=\"" << w << "\" height=\"" << h
        << "\" role=\"img\">";
    svg << "<line x1=\"" << mid << "\" y1=\"0\" x2=\"" << mid << "\" y2=\"" << h
        << "\" stroke=\"#999\" stroke-width=\"1\"/>";
    double y = pad;
    for (const auto& [name, score] : items) {
        const double len = std::fabs(score) / max_abs * (plot_w / 2 - 2);
        const double x = score >= 0 ? mid : mid - len;
        const char* fill = score >= 0 ? "#2b7bba" : "#c0392b";
        svg << "<text x=\"" << label_w << "\" y=\"" << y + row_h * 0.7
            << "\" text-anchor=\"end\" font-size=\"11\">" << esc(name) << "</text>";
        svg << "<rect x=\"" << x << "\" y=\"" << y + 3 << "\" width=\"" << std::max(len, 0.5)
            << "\" height=\"" << row_h - 8 << "\" fill=\"" << fill << "\"/>";
        svg << "<text x=\"" << (score >= 0 ? x + len + 3 : x - 3) << "\" y=\"" << y + row_h * 0.7
            << "\" text-anchor=\"" << (score >= 0 ? "start" : "end") << "\" font-size=\"10\">"
            << num(score) << "</text>";
        y += row_h;
    }
    svg << "</svg>";
    return svg.str();
}

std::string svg_curve(const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::string& caption) {
    const double w = 360, h = 180, pad = 28;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!xs.empty()) {
        xmin = *std::min_element(xs.begin(), xs.end());
        xmax = *std::max_element(xs.begin(), xs.end());
        ymin = *std::min_element(ys.begin(), ys.end());
        ymax = *std::max_element(ys.begin(), ys.end());
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    auto px = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad); };
    auto py = [&](double y) { return h - pad - (y - ymin) / (ymax - ymin) * (h - 2 * pad); };
    std::ostringstream svg;
    svg << "<svg viewBox=\"0 0 " << w << " " << h << "\" width=\"" << w << "\" height=\"" << h
        << "\" role=\"img\">";
    svg << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad
        << "\" height=\"" << h - 2 * pad << "\" fill=\"none\" stroke=\"#bbb\"/>";
    svg << "<polyline fill=\"none\" stroke=\"#2b7bba\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) svg << px(xs[i]) << "," << py(ys[i]) << " ";
    svg << "\"/>";
    svg << "<text x=\"" << w / 2 << "\" y=\"" << h - 6
        << "\" text-anchor=\"middle\" font-size=\"11\">" << esc(caption) << "</text>";
    svg << "<text x=\"" << pad - 4 << "\" y=\"" << py(ymin)
        << "\" text-anchor=\"end\" font-size=\"9\">" << num(ymin) << "</text>";
    svg << "<text x=\"" << pad - 4 << "\" y=\"" << py(ymax) + 8
        << "\" text-anchor=\"end\" font-size=\"9\">" << num(ymax) << "</text>";
    svg << "<text x=\"" << px(xmin) << "\" y=\"" << h - pad + 12
        << "\" text-anchor=\"middle\" font-size=\"9\">" << num(xmin) << "</text>";
    svg << "<text x=\"" << px(xmax) << "\" y=\"" << h - pad + 12
        << "\" text-anchor=\"middle\" font-size=\"9\">" << num(xmax) << "</text>";
    svg << "</svg>";
    return svg.str();
}

std::string attribution_panel_body(const nlohmann::json& r) {
    std::ostringstream out;
    if (r.contains("output_label"))
        out << "<p>Explained output: <b>" << esc(r["output_label"].get<std::string>())
            << "</b></p>";
    std::vector<std::pair<std::string, double>> items;
    for (const auto& f : r.value("features", nlohmann::json::array())) {
        std::string label = f.value("feature", "");
        const std::string v = f.value("value", "");
        if (!v.empty()) label += " = " + v;
        items.emplace_back(label, f.value("score", 0.0));
    }
    if (!items.empty()) out << svg_bars(items);
    if (r.contains("base_value"))
        out << "<p class=\"note\">base value " << num(r["base_value"]) << "</p>";
    return out.str();
}

std::string decision_path_body(const nlohmann::json& r) {
    std::ostringstream out;
    out << "<ol>";
    for (const auto& s : r.value("steps", nlohmann::json::array()))
        out << "<li>" << esc(s.value("description", s.dump())) << "</li>";
    out << "</ol><p class=\"note\">leaf value " << num(r.value("leaf_value", nlohmann::json()))
        << "</p>";
    return out.str();
}

std::string counterfactual_body(const nlohmann::json& r) {
    std::ostringstream out;
    if (!r.value("found", false)) {
        out << "<p class=\"note\">No counterfactual found.</p>";
        return out.str();
    }
    std::size_t k = 0;
    for (const auto& ex : r.value("examples", nlohmann::json::array())) {
        out << "<h4>What-if " << ++k << " (class " << ex.value("predicted_class", -1)
            << ", p=" << num(ex.value("probability", 0.0)) << ", distance "
            << num(ex.value("l1_distance", 0.0)) << ")</h4>";
        out << "<table><tr><th>feature</th><th>old</th><th>new</th></tr>";
        for (const auto& ch : ex.value("changed", nlohmann::json::array()))
            out << "<tr><td>" << esc(ch.value("feature", "")) << "</td><td>"
                << esc(ch.value("old", "")) << "</td><td><b>" << esc(ch.value("new", ""))
                << "</b></td></tr>";
        out << "</table>";
    }
    return out.str();
}

std::string ts_shap_body(const nlohmann::json& r) {
    std::ostringstream out;
    std::vector<double> ts = r.value("timestamps", std::vector<double>{});
    std::vector<double> vs = r.value("values", std::vector<double>{});
    if (!ts.empty()) out << svg_curve(ts, vs, "window");
    out << "<table><tr><th>segment</th><th>range</th><th>score</th></tr>";
    std::size_t k = 0;
    for (const auto& s : r.value("segments", nlohmann::json::array()))
        out << "<tr><td>" << ++k << "</td><td>[" << s.value("start", 0) << ", "
            << s.value("end", 0) << ")</td><td>" << num(s.value("score", 0.0)) << "</td></tr>";
    out << "</table>";
    return out.str();
}

std::string ts_ce_body(const nlohmann::json& r) {
    std::ostringstream out;
    if (!r.value("found", false)) {
        out << "<p class=\"note\">No repair found.</p>";
        return out.str();
    }
    std::vector<double> ts = r.value("timestamps", std::vector<double>{});
    std::vector<double> orig = r.value("original", std::vector<double>{});
    std::vector<double> mod = r.value("modified", std::vector<double>{});
    if (!ts.empty()) out << svg_curve(ts, orig, "original (solid); dashed overlay = repaired");
    out << "<p>Repaired by replacing " << r.value("modified_indices", std::vector<int>{}).size()
        << " points; anomaly score " << num(r.value("score_before", 0.0)) << " &rarr; "
        << num(r.value("score_after", 0.0)) << ".</p>";
    out << "<table><tr><th>t</th><th>original</th><th>modified</th></tr>";
    for (int idx : r.value("modified_indices", std::vector<int>{})) {
        const auto i = static_cast<std::size_t>(idx);
        if (i < ts.size())
            out << "<tr><td>" << num(ts[i]) << "</td><td>" << num(orig[i]) << "</td><td><b>"
                << num(mod[i]) << "</b></td></tr>";
    }
    out << "</table>";
    return out.str();
}

// Per-grid-point values may be nested per model output; chart output 0.
std::vector<double> first_output(const nlohmann::json& arr) {
    std::vector<double> out;
    for (const auto& v : arr)
        out.push_back(v.is_array() ? v.at(0).get<double>() : v.get<double>());
    return out;
}

std::string curves_body(const nlohmann::json& r) {
    std::ostringstream out;
    for (const auto& c : r.value("curves", nlohmann::json::array())) {
        const std::string feature = c.value("feature", "");
        if (c.contains("means")) {  // pdp
            std::vector<double> xs, ys = first_output(c.value("means", nlohmann::json::array()));
            const auto& grid = c.value("grid", nlohmann::json::array());
            bool numeric = true;
            for (const auto& g : grid)
                if (!g.is_number()) numeric = false;
            if (numeric && grid.size() == ys.size()) {
                for (const auto& g : grid) xs.push_back(g.get<double>());
                out << svg_curve(xs, ys, feature);
            } else {
                out << "<table><tr><th>" << esc(feature) << "</th><th>mean output</th></tr>";
                for (std::size_t i = 0; i < ys.size(); ++i)
                    out << "<tr><td>" << num(grid[i]) << "</td><td>" << num(ys[i]) << "</td></tr>";
                out << "</table>";
            }
        } else if (c.contains("effects")) {  // ale
            std::vector<double> edges = c.value("edges", std::vector<double>{});
            std::vector<double> effects = first_output(c.value("effects", nlohmann::json::array()));
            if (edges.size() == effects.size()) out << svg_curve(edges, effects, feature);
        }
    }
    return out.str();
}

std::string morris_body(const nlohmann::json& r) {
    std::ostringstream out;
    const auto names = r.value("features", std::vector<std::string>{});
    const auto mu = r.value("mu", std::vector<double>{});
    const auto mu_star = r.value("mu_star", std::vector<double>{});
    const auto sigma = r.value("sigma", std::vector<double>{});
    out << "<table><tr><th>feature</th><th>mu</th><th>mu*</th><th>sigma</th></tr>";
    for (std::size_t i = 0; i < names.size(); ++i)
        out << "<tr><td>" << esc(names[i]) << "</td><td>" << num(mu[i]) << "</td><td>"
            << num(mu_star[i]) << "</td><td>" << num(sigma[i]) << "</td></tr>";
    out << "</table>";
    return out.str();
}

std::string heat_color(double v) {
    // -1 -> red, 0 -> white, +1 -> blue
    v = std::clamp(v, -1.0, 1.0);
    int r = 255, g = 255, b = 255;
    if (v >= 0) {
        r = static_cast<int>(255 - 180 * v);
        g = static_cast<int>(255 - 120 * v);
    } else {
        g = static_cast<int>(255 - 120 * -v);
        b = static_cast<int>(255 - 180 * -v);
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string correlation_body(const nlohmann::json& r) {
    std::ostringstream out;
    const auto names = r.value("features", std::vector<std::string>{});
    const auto& m = r.value("matrix", nlohmann::json::array());
    out << "<table class=\"heat\"><tr><th></th>";
    for (const auto& n : names) out << "<th>" << esc(n) << "</th>";
    out << "</tr>";
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << "<tr><th>" << esc(names[i]) << "</th>";
        for (std::size_t j = 0; j < names.size(); ++j) {
            const double v = m[i][j].get<double>();
            out << "<td style=\"background:" << heat_color(v) << "\">" << num(v) << "</td>";
        }
        out << "</tr>";
    }
    out << "</table>";
    const auto cc = r.value("constant_columns", std::vector<std::string>{});
    if (!cc.empty()) {
        out << "<p class=\"note\">constant columns:";
        for (const auto& n : cc) out << " " << esc(n);
        out << "</p>";
    }
    return out.str();
}

std::string imbalance_body(const nlohmann::json& r) {
    std::ostringstream out;
    const auto labels = r.value("classes", std::vector<std::string>{});
    const auto counts = r.value("counts", std::vector<double>{});
    const auto freqs = r.value("frequencies", std::vector<double>{});
    out << "<table><tr><th>class</th><th>count</th><th>frequency</th></tr>";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << "<tr><td>" << esc(labels[i]) << "</td><td>" << num(counts[i]) << "</td><td>"
            << num(freqs[i]) << "</td></tr>";
    out << "</table>";
    return out.str();
}

std::string feature_selection_body(const nlohmann::json& r) {
    std::ostringstream out;
    out << "<table><tr><th>feature</th><th>relevance</th><th>selected</th></tr>";
    const auto selected = r.value("selected", std::vector<std::string>{});
    for (const auto& f : r.value("ranked", nlohmann::json::array())) {
        const std::string name = f.value("feature", "");
        const bool sel = std::find(selected.begin(), selected.end(), name) != selected.end();
        out << "<tr><td>" << esc(name) << "</td><td>" << num(f.value("score", 0.0))
            << "</td><td>" << (sel ? "yes" : "") << "</td></tr>";
    }
    out << "</table>";
    return out.str();
}

std::string panel_body(const std::string& name, const nlohmann::json& r) {
    if (r.contains("error"))
        return "<p class=\"error\">" + esc(r["error"].get<std::string>()) + "</p>";
    if (name == "glass-tree") return decision_path_body(r);
    if (name == "ce" || name == "mace-greedy") return counterfactual_body(r);
    if (name == "ts-shap") return ts_shap_body(r);
    if (name == "ts-ce") return ts_ce_body(r);
    if (name == "pdp" || name == "ale") return curves_body(r);
    if (name == "morris") return morris_body(r);
    if (name == "correlation") return correlation_body(r);
    if (name == "imbalance") return imbalance_body(r);
    if (name == "feature-selection") return feature_selection_body(r);
    if (r.contains("features") && r["features"].is_array()) return attribution_panel_body(r);
    return "<pre>" + esc(r.dump(2)) + "</pre>";
}

std::string panel(const std::string& name, const nlohmann::json& r) {
    return "<div class=\"panel\" data-explainer=\"" + esc(name) + "\"><h3>" + esc(name) +
           "</h3>" + panel_body(name, r) + "</div>\n";
}

}  // namespace

std::string render_report(const ReportSpec& spec) {
    const nlohmann::json& doc = spec.document;
    const nlohmann::json local = doc.value("local", nlohmann::json::object());
    const nlohmann::json global = doc.value("global", nlohmann::json::object());

    auto keep = [&](const std::string& name) {
        return spec.panel_order.empty() ||
               std::find(spec.panel_order.begin(), spec.panel_order.end(), name) !=
                   spec.panel_order.end();
    };
    std::vector<std::string> local_names, global_names;
    for (const auto& entry : explainer_registry()) {
        if (local.contains(entry.name) && keep(entry.name)) local_names.push_back(entry.name);
        if (global.contains(entry.name) && keep(entry.name)) global_names.push_back(entry.name);
    }

    std::size_t n_instances = 0;
    for (const auto& n : local_names)
        n_instances = std::max(n_instances, local.at(n).size());

    std::ostringstream html;
    html << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>"
         << esc(spec.title) << "</title>\n<style>\n"
         << "body{font-family:system-ui,sans-serif;margin:24px;color:#222}\n"
         << "h1{font-size:22px}h2{font-size:17px;border-bottom:1px solid #ddd;"
            "padding-bottom:4px}h3{font-size:14px;margin:4px 0}h4{font-size:12px;margin:6px 0}\n"
         << ".row{display:flex;flex-wrap:wrap;gap:14px;align-items:flex-start}\n"
         << ".panel{border:1px solid #ddd;border-radius:6px;padding:10px;min-width:280px}\n"
         << "table{border-collapse:collapse;font-size:12px}td,th{border:1px solid #ccc;"
            "padding:3px 7px;text-align:left}\n"
         << ".heat td{text-align:right}\n"
         << ".note{color:#666;font-size:11px}.error{color:#c0392b;font-size:12px}\n"
         << "</style>\n</head>\n<body>\n<h1>" << esc(spec.title) << "</h1>\n";

    if (doc.contains("dataset")) {
        const auto& ds = doc["dataset"];
        html << "<p class=\"note\">dataset: " << ds.value("row_count", 0) << " rows, hash "
             << esc(ds.value("content_hash", "")) << "</p>\n";
    }

    for (std::size_t i = 0; i < n_instances; ++i) {
        html << "<h2>Instance " << i << "</h2>\n";
        if (doc.contains("instances")) {
            const auto& inst = doc["instances"];
            std::vector<std::string> cols;
            if (inst.contains("schema"))
                for (const auto& c : inst["schema"].value("columns", nlohmann::json::array()))
                    cols.push_back(c.value("name", ""));
            const auto& rows = inst.value("rows", nlohmann::json::array());
            if (i < rows.size()) {
                html << "<table><tr>";
                for (const auto& c : cols) html << "<th>" << esc(c) << "</th>";
                html << "</tr><tr>";
                for (const auto& v : rows[i]) html << "<td>" << num(v) << "</td>";
                html << "</tr></table>\n";
            }
        }
        html << "<div class=\"row\">\n";
        for (const auto& name : local_names) {
            const auto& results = local.at(name);
            if (i < results.size()) html << panel(name, results[i]);
        }
        html << "</div>\n";
    }

    if (!global_names.empty()) {
        html << "<h2>Global</h2>\n<div class=\"row\">\n";
        for (const auto& name : global_names) html << panel(name, global.at(name));
        html << "</div>\n";
    }

    html << "</body>\n</html>\n";
    return html.str();
}

}  // namespace xai

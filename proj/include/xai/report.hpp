#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "xai/engine.hpp"

namespace xai {

// Canonical bundle document: schema_version "1", dataset fingerprint,
// config echo, instances, local/global sections. Serialization is a
// fixpoint: keys sorted, shortest round-trip floats, trailing newline.
nlohmann::json bundle_to_document(const ExplanationBundle& bundle,
                                  const nlohmann::json& config_echo = nlohmann::json::object());
ExplanationBundle bundle_from_document(const nlohmann::json& doc);

std::string to_json(const ExplanationBundle& bundle,
                    const nlohmann::json& config_echo = nlohmann::json::object());
std::string canonical_dump(const nlohmann::json& doc);

struct ReportSpec {
    nlohmann::json document;  // a BundleDocument
    std::string title = "Explanation report";
    std::vector<std::string> panel_order;  // empty = bundle order
};

// Renders a self-contained HTML comparison report: one section per instance
// with side-by-side local panels, one section for global explainers. Inline
// SVG only, no external fetches.
std::string render_report(const ReportSpec& spec);

}  // namespace xai

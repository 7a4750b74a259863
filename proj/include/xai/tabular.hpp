#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "xai/error.hpp"

namespace xai {

enum class ColumnKind { Continuous, Categorical };

// A cell is a finite real, a category label, or missing.
struct MissingCell {
    bool operator==(const MissingCell&) const = default;
};
using Cell = std::variant<double, std::string, MissingCell>;

inline bool cell_is_missing(const Cell& c) { return std::holds_alternative<MissingCell>(c); }

// "" and "n/a" (case-insensitive) mark missing values in raw text cells.
bool is_missing_marker(const std::string& raw);

// Attempts to parse a full-width real number; rejects trailing garbage.
std::optional<double> parse_real(const std::string& raw);

struct TabularSchema {
    struct Column {
        std::string name;
        ColumnKind kind = ColumnKind::Continuous;
        std::vector<std::string> categories;  // categorical only, first-seen order

        bool operator==(const Column&) const = default;
    };

    std::vector<Column> columns;
    std::optional<std::string> target;

    std::size_t n_columns() const { return columns.size(); }
    std::optional<std::size_t> column_index(const std::string& name) const;
    void validate() const;

    bool operator==(const TabularSchema&) const = default;
};

struct TabularBatch {
    TabularSchema schema;
    std::vector<std::vector<Cell>> rows;

    std::size_t n_rows() const { return rows.size(); }
    const Cell& cell(std::size_t r, std::size_t c) const { return rows[r][c]; }
    void validate() const;

    bool operator==(const TabularBatch&) const = default;
};

// Infers column kinds from raw text samples. A column is continuous iff every
// non-missing cell parses as a real; otherwise categorical with first-seen
// category order.
TabularSchema infer_schema(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows,
                           const std::optional<std::string>& target = std::nullopt);

// Builds a validated batch from raw text cells. Unseen categorical labels are
// appended to the returned batch's schema category lists.
TabularBatch make_tabular(TabularSchema schema,
                          const std::vector<std::vector<std::string>>& raw_rows);

// RFC-4180 CSV.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string write_csv(const std::vector<std::vector<std::string>>& rows);

// Schema JSON sidecar: {"columns":[{"name":...,"kind":...,"categories":[...]?}],"target":...}
nlohmann::json schema_to_json(const TabularSchema& schema);
TabularSchema schema_from_json(const nlohmann::json& j);

nlohmann::json batch_to_json(const TabularBatch& batch);
TabularBatch batch_from_json(const nlohmann::json& j);

// Text rendering of one cell (used by reports and CSV export).
std::string cell_to_string(const Cell& c);

}  // namespace xai

#include "xai/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace xai {

bool is_missing_marker(const std::string& raw) {
    if (raw.empty()) return true;
    if (raw.size() != 3) return false;
    return std::tolower(static_cast<unsigned char>(raw[0])) == 'n' && raw[1] == '/' &&
           std::tolower(static_cast<unsigned char>(raw[2])) == 'a';
}

std::optional<double> parse_real(const std::string& raw) {
    if (raw.empty()) return std::nullopt;
    const char* begin = raw.data();
    const char* end = begin + raw.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    if (begin == end) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

std::optional<std::size_t> TabularSchema::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return i;
    return std::nullopt;
}

void TabularSchema::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& col : columns) {
        if (col.name.empty()) throw data_error("schema: empty column name");
        if (!seen.insert(col.name).second)
            throw data_error("schema: duplicate column name '" + col.name + "'");
        if (col.kind == ColumnKind::Categorical) {
            if (col.categories.empty())
                throw data_error("schema: categorical column '" + col.name + "' has no categories");
            std::unordered_set<std::string> cats;
            for (const auto& c : col.categories)
                if (!cats.insert(c).second)
                    throw data_error("schema: duplicate category '" + c + "' in column '" +
                                     col.name + "'");
        }
    }
    if (target && !column_index(*target))
        throw data_error("schema: target '" + *target + "' is not a column");
}

void TabularBatch::validate() const {
    schema.validate();
    const std::size_t d = schema.n_columns();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != d)
            throw data_error("batch: row " + std::to_string(r) + " has " +
                             std::to_string(rows[r].size()) + " cells, expected " +
                             std::to_string(d));
        for (std::size_t c = 0; c < d; ++c) {
            const Cell& cell = rows[r][c];
            if (cell_is_missing(cell)) continue;
            const auto& col = schema.columns[c];
            if (col.kind == ColumnKind::Continuous) {
                if (!std::holds_alternative<double>(cell))
                    throw data_error("batch: non-numeric cell in continuous column '" +
                                     col.name + "'");
                if (!std::isfinite(std::get<double>(cell)))
                    throw data_error("batch: non-finite cell in column '" + col.name + "'");
            } else {
                if (!std::holds_alternative<std::string>(cell))
                    throw data_error("batch: numeric cell in categorical column '" + col.name +
                                     "'");
                const auto& label = std::get<std::string>(cell);
                if (std::find(col.categories.begin(), col.categories.end(), label) ==
                    col.categories.end())
                    throw data_error("batch: unknown category '" + label + "' in column '" +
                                     col.name + "'");
            }
        }
    }
}

TabularSchema infer_schema(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows,
                           const std::optional<std::string>& target) {
    if (header.empty()) throw data_error("infer_schema: empty header");
    if (rows.empty()) throw data_error("infer_schema: no sample rows");
    TabularSchema schema;
    for (std::size_t c = 0; c < header.size(); ++c) {
        TabularSchema::Column col;
        col.name = header[c];
        bool all_numeric = true;
        bool any_value = false;
        for (const auto& row : rows) {
            if (c >= row.size()) continue;
            const std::string& raw = row[c];
            if (is_missing_marker(raw)) continue;
            any_value = true;
            if (!parse_real(raw)) { all_numeric = false; break; }
        }
        if (all_numeric && any_value) {
            col.kind = ColumnKind::Continuous;
        } else {
            col.kind = ColumnKind::Categorical;
            for (const auto& row : rows) {
                if (c >= row.size()) continue;
                const std::string& raw = row[c];
                if (is_missing_marker(raw)) continue;
                if (std::find(col.categories.begin(), col.categories.end(), raw) ==
                    col.categories.end())
                    col.categories.push_back(raw);
            }
            if (col.categories.empty()) col.categories.push_back("missing");
        }
        schema.columns.push_back(std::move(col));
    }
    schema.target = target;
    schema.validate();
    return schema;
}

TabularBatch make_tabular(TabularSchema schema,
                          const std::vector<std::vector<std::string>>& raw_rows) {
    schema.validate();
    TabularBatch batch;
    batch.schema = std::move(schema);
    const std::size_t d = batch.schema.n_columns();
    for (std::size_t r = 0; r < raw_rows.size(); ++r) {
        const auto& raw = raw_rows[r];
        if (raw.size() != d)
            throw data_error("make_tabular: row " + std::to_string(r) + " width " +
                             std::to_string(raw.size()) + " != " + std::to_string(d));
        std::vector<Cell> row;
        row.reserve(d);
        for (std::size_t c = 0; c < d; ++c) {
            auto& col = batch.schema.columns[c];
            if (is_missing_marker(raw[c])) {
                row.emplace_back(MissingCell{});
                continue;
            }
            if (col.kind == ColumnKind::Continuous) {
                auto v = parse_real(raw[c]);
                if (!v)
                    throw data_error("make_tabular: cell '" + raw[c] +
                                     "' is not numeric in continuous column '" + col.name + "'");
                row.emplace_back(*v);
            } else {
                if (std::find(col.categories.begin(), col.categories.end(), raw[c]) ==
                    col.categories.end())
                    col.categories.push_back(raw[c]);
                row.emplace_back(raw[c]);
            }
        }
        batch.rows.push_back(std::move(row));
    }
    batch.validate();
    return batch;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(row);
        row.clear();
    };
    while (i < n) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < n && text[i + 1] == '"') { field += '"'; i += 2; continue; }
                in_quotes = false;
                ++i;
            } else {
                field += ch;
                ++i;
            }
        } else if (ch == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
            ++i;
        } else if (ch == ',') {
            end_field();
            ++i;
        } else if (ch == '\r' && i + 1 < n && text[i + 1] == '\n') {
            end_row();
            i += 2;
        } else if (ch == '\n' || ch == '\r') {
            end_row();
            ++i;
        } else {
            field += ch;
            field_started = true;
            ++i;
        }
    }
    if (in_quotes) throw data_error("csv: unterminated quoted field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::string write_csv(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            const std::string& f = row[c];
            if (f.find_first_of(",\"\r\n") != std::string::npos) {
                out += '"';
                for (char ch : f) {
                    if (ch == '"') out += '"';
                    out += ch;
                }
                out += '"';
            } else {
                out += f;
            }
        }
        out += '\n';
    }
    return out;
}

nlohmann::json schema_to_json(const TabularSchema& schema) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& col : schema.columns) {
        nlohmann::json jc;
        jc["name"] = col.name;
        jc["kind"] = col.kind == ColumnKind::Continuous ? "continuous" : "categorical";
        if (col.kind == ColumnKind::Categorical) jc["categories"] = col.categories;
        cols.push_back(jc);
    }
    nlohmann::json j;
    j["columns"] = cols;
    if (schema.target) j["target"] = *schema.target;
    return j;
}

TabularSchema schema_from_json(const nlohmann::json& j) {
    TabularSchema schema;
    if (!j.contains("columns") || !j["columns"].is_array())
        throw data_error("schema json: missing 'columns' array");
    for (const auto& jc : j["columns"]) {
        TabularSchema::Column col;
        col.name = jc.at("name").get<std::string>();
        const auto kind = jc.at("kind").get<std::string>();
        if (kind == "continuous") {
            col.kind = ColumnKind::Continuous;
        } else if (kind == "categorical") {
            col.kind = ColumnKind::Categorical;
            if (jc.contains("categories"))
                col.categories = jc["categories"].get<std::vector<std::string>>();
            if (col.categories.empty()) col.categories.push_back("missing");
        } else {
            throw data_error("schema json: unknown kind '" + kind + "'");
        }
        schema.columns.push_back(std::move(col));
    }
    if (j.contains("target") && !j["target"].is_null())
        schema.target = j["target"].get<std::string>();
    schema.validate();
    return schema;
}

std::string cell_to_string(const Cell& c) {
    if (cell_is_missing(c)) return "n/a";
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    const double v = std::get<double>(c);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

nlohmann::json batch_to_json(const TabularBatch& batch) {
    nlohmann::json j;
    j["schema"] = schema_to_json(batch.schema);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : batch.rows) {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& cell : row) {
            if (cell_is_missing(cell)) jr.push_back(nullptr);
            else if (std::holds_alternative<double>(cell)) jr.push_back(std::get<double>(cell));
            else jr.push_back(std::get<std::string>(cell));
        }
        rows.push_back(jr);
    }
    j["rows"] = rows;
    return j;
}

TabularBatch batch_from_json(const nlohmann::json& j) {
    TabularBatch batch;
    batch.schema = schema_from_json(j.at("schema"));
    for (const auto& jr : j.at("rows")) {
        std::vector<Cell> row;
        for (const auto& jc : jr) {
            if (jc.is_null()) row.emplace_back(MissingCell{});
            else if (jc.is_number()) row.emplace_back(jc.get<double>());
            else row.emplace_back(jc.get<std::string>());
        }
        batch.rows.push_back(std::move(row));
    }
    batch.validate();
    return batch;
}

}  // namespace xai

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plrm/model.hpp"

namespace plrm {

/// Covariate column: numeric, or categorical expanded to (levels - 1)
/// dummies against the stated reference level.
struct ColumnSpec {
    std::string column;
    bool categorical = false;
    std::vector<std::string> levels;
    std::string reference;
};

/// Maps CSV columns onto the model. The last response level is the baseline
/// category.
struct SchemaSpec {
    std::string response_column;
    std::vector<std::string> response_levels;
    std::vector<ColumnSpec> covariates;
    std::optional<std::string> count_column;

    static SchemaSpec from_json(const nlohmann::json& j);
    static SchemaSpec from_file(const std::string& path);
    void validate() const;
};

/// RFC-4180 CSV with a header row. Quoted fields, embedded commas/newlines
/// and doubled quotes are honored.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

/// Parses a CSV file against the schema. group_rows collapses rows with
/// identical covariate patterns into grouped counts. Column order is fixed:
/// intercept, then covariates in schema order with dummies in level order.
Dataset load_dataset(const std::string& path, const SchemaSpec& schema,
                     bool group_rows = false);

/// Deterministic report wrapper: serialization round-trips losslessly.
struct Report {
    nlohmann::ordered_json body;

    std::string serialize() const { return body.dump(2) + "\n"; }
    static Report parse(const std::string& text) {
        return Report{nlohmann::ordered_json::parse(text)};
    }
    bool operator==(const Report& other) const { return body == other.body; }
};

/// FNV-1a hash of a file's bytes, as fixed-width hex (report provenance).
std::string file_hash(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace plrm

#include "plrm/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace plrm {

SchemaSpec SchemaSpec::from_json(const nlohmann::json& j) {
    SchemaSpec s;
    const auto& resp = j.at("response");
    s.response_column = resp.at("column").get<std::string>();
    s.response_levels = resp.at("levels").get<std::vector<std::string>>();
    for (const auto& c : j.at("covariates")) {
        ColumnSpec col;
        col.column = c.at("column").get<std::string>();
        const std::string kind = c.value("kind", std::string("numeric"));
        if (kind == "categorical") {
            col.categorical = true;
            col.levels = c.at("levels").get<std::vector<std::string>>();
            col.reference = c.value("reference", col.levels.front());
        } else if (kind != "numeric") {
            throw data_error("schema: unknown covariate kind '" + kind + "'");
        }
        s.covariates.push_back(std::move(col));
    }
    if (j.contains("count_column"))
        s.count_column = j.at("count_column").get<std::string>();
    s.validate();
    return s;
}

SchemaSpec SchemaSpec::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("schema: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("schema: " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

void SchemaSpec::validate() const {
    if (response_column.empty()) throw data_error("schema: missing response column");
    if (response_levels.size() < 2)
        throw data_error("schema: response needs at least 2 levels");
    for (const auto& c : covariates) {
        if (c.column.empty()) throw data_error("schema: covariate without a column name");
        if (c.categorical) {
            if (c.levels.size() < 2)
                throw data_error("schema: categorical column '" + c.column +
                                 "' needs at least 2 levels");
            bool found = false;
            for (const auto& l : c.levels) found = found || l == c.reference;
            if (!found)
                throw data_error("schema: reference level '" + c.reference +
                                 "' not among the levels of '" + c.column + "'");
        }
    }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&]() {
        end_field();
        rows.push_back(row);
        row.clear();
    };
    while (i < n) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            end_row();
        } else if (c == '\r') {
            // swallow; \r\n handled by the following \n
            if (i + 1 >= n || text[i + 1] != '\n') end_row();
        } else {
            field += c;
        }
        ++i;
    }
    if (!field.empty() || !row.empty()) end_row();
    if (quoted) throw data_error(path + ": unterminated quoted field");
    if (rows.empty()) throw data_error(path + ": empty file");
    return rows;
}

namespace {

int find_column(const std::vector<std::string>& header, const std::string& name,
                const std::string& path) {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return static_cast<int>(j);
    throw data_error(path + ": column '" + name + "' not found in header");
}

double parse_numeric(const std::string& cell, std::size_t row,
                     const std::string& column) {
    if (cell.empty())
        throw data_error("row " + std::to_string(row) + ", column '" + column +
                         "': missing value");
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != cell.size())
        throw data_error("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse '" + cell + "' as a number");
    return v;
}

}  // namespace

Dataset load_dataset(const std::string& path, const SchemaSpec& schema,
                     bool group_rows) {
    schema.validate();
    const auto rows = read_csv(path);
    const auto& header = rows.front();
    const int resp_col = find_column(header, schema.response_column, path);
    int count_col = -1;
    if (schema.count_column)
        count_col = find_column(header, *schema.count_column, path);
    struct CovRef {
        int col;
        const ColumnSpec* spec;
    };
    std::vector<CovRef> cov_refs;
    for (const auto& c : schema.covariates)
        cov_refs.push_back({find_column(header, c.column, path), &c});

    // Expanded design width and column names.
    std::vector<std::string> names{"(intercept)"};
    for (const auto& c : schema.covariates) {
        if (!c.categorical) {
            names.push_back(c.column);
        } else {
            for (const auto& l : c.levels)
                if (l != c.reference) names.push_back(c.column + "=" + l);
        }
    }
    const int k = static_cast<int>(names.size()) - 1;
    const int d = static_cast<int>(schema.response_levels.size()) - 1;

    std::vector<Vector> xs;
    std::vector<IVector> ys;
    std::map<std::vector<double>, std::size_t> pattern_index;

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() == 1 && cells[0].empty()) continue;  // blank line
        if (cells.size() != header.size())
            throw data_error(path + ": row " + std::to_string(r) + " has " +
                             std::to_string(cells.size()) + " fields, expected " +
                             std::to_string(header.size()));
        Vector x(k + 1);
        x[0] = 1.0;
        int at = 1;
        for (const auto& ref : cov_refs) {
            const std::string& cell = cells[ref.col];
            if (!ref.spec->categorical) {
                x[at++] = parse_numeric(cell, r, ref.spec->column);
            } else {
                if (cell.empty())
                    throw data_error("row " + std::to_string(r) + ", column '" +
                                     ref.spec->column + "': missing value");
                bool known = false;
                for (const auto& l : ref.spec->levels) known = known || l == cell;
                if (!known)
                    throw data_error("row " + std::to_string(r) + ", column '" +
                                     ref.spec->column + "': unknown level '" + cell +
                                     "'");
                for (const auto& l : ref.spec->levels)
                    if (l != ref.spec->reference) x[at++] = (cell == l) ? 1.0 : 0.0;
            }
        }
        const std::string& resp = cells[resp_col];
        int level = -1;
        for (std::size_t j = 0; j < schema.response_levels.size(); ++j)
            if (schema.response_levels[j] == resp) level = static_cast<int>(j);
        if (level < 0)
            throw data_error("row " + std::to_string(r) + ", column '" +
                             schema.response_column + "': unknown level '" + resp +
                             "'");
        int count = 1;
        if (count_col >= 0) {
            const double c = parse_numeric(cells[count_col], r, *schema.count_column);
            count = static_cast<int>(c);
            if (count != c || count < 1)
                throw data_error("row " + std::to_string(r) + ", column '" +
                                 *schema.count_column +
                                 "': counts must be positive integers");
        }
        std::size_t slot;
        if (group_rows) {
            std::vector<double> key(x.data(), x.data() + x.size());
            auto it = pattern_index.find(key);
            if (it == pattern_index.end()) {
                slot = xs.size();
                pattern_index.emplace(std::move(key), slot);
                xs.push_back(x);
                ys.push_back(IVector::Zero(d + 1));
            } else {
                slot = it->second;
            }
        } else {
            slot = xs.size();
            xs.push_back(x);
            ys.push_back(IVector::Zero(d + 1));
        }
        ys[slot][level] += count;
    }
    if (xs.empty()) throw data_error(path + ": no data rows");

    Dataset data;
    data.dims = ModelDims(k, d);
    data.X.resize(static_cast<Eigen::Index>(xs.size()), k + 1);
    data.Y.resize(static_cast<Eigen::Index>(xs.size()), d + 1);
    data.trials.resize(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        data.X.row(static_cast<Eigen::Index>(i)) = xs[i];
        data.Y.row(static_cast<Eigen::Index>(i)) = ys[i];
        data.trials[static_cast<Eigen::Index>(i)] = ys[i].sum();
    }
    data.column_names = names;
    data.level_names = schema.response_levels;
    data.validate();
    return data;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    out << content;
}

}  // namespace plrm

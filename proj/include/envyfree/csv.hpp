#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "envyfree/core.hpp"

namespace envyfree {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal formatting. Locale independent, so identical
/// runs produce byte-identical files.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

struct TableCsv {
    std::vector<int> ids;
    int k = 0;
    std::vector<std::vector<double>> values;
};

/// Parse a utility/loss table. Expected header: id,y0,...,y{k-1}; one row per
/// individual, values in [0,1].
inline TableCsv load_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.front() != "id")
        throw DataError(path + ": header must be id,y0,...,y{k-1}");
    TableCsv table;
    table.k = static_cast<int>(header.size()) - 1;
    for (int y = 0; y < table.k; ++y) {
        if (header[static_cast<std::size_t>(y + 1)] != "y" + std::to_string(y))
            throw DataError(path + ": unexpected outcome column '" +
                            header[static_cast<std::size_t>(y + 1)] + "'");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": wrong cell count");
        try {
            table.ids.push_back(std::stoi(cells[0]));
            std::vector<double> row;
            row.reserve(static_cast<std::size_t>(table.k));
            for (int y = 0; y < table.k; ++y) {
                const double v = std::stod(cells[static_cast<std::size_t>(y + 1)]);
                if (!(v >= 0.0 && v <= 1.0))
                    throw DataError(path + ":" + std::to_string(line_no) +
                                    ": value outside [0,1]");
                row.push_back(v);
            }
            table.values.push_back(std::move(row));
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed number");
        }
    }
    if (table.ids.empty()) throw DataError(path + ": no data rows");
    return table;
}

inline UtilityModel load_model_csv(const std::string& path) {
    auto table = load_table_csv(path);
    try {
        return UtilityModel::table(std::move(table.ids), std::move(table.values));
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline std::vector<Individual> individuals_from_ids(std::span<const int> ids) {
    std::vector<Individual> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(Individual{id, {}});
    return out;
}

// Tabular results with preformatted cells. Strings are quoted on output,
// numbers are written via format_double by the code that fills the table.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out.push_back(c);
    }
    out += "\"";
    return out;
}

inline bool cell_is_numeric(const std::string& s) {
    if (s.empty()) return false;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline void write_csv(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ',';
        out << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw DataError("write_csv: row width mismatch");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << (cell_is_numeric(row[c]) ? row[c] : csv_quote(row[c]));
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace envyfree

#pragma once
// Result tables (RFC 4180 CSV, LF line endings) and run manifests.

#include "oirs/format.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace oirs {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolName = "oirs-sim";
inline constexpr const char* kToolVersion = "1.0.0";

using Cell = std::variant<std::string, double, long long>;

inline std::string cell_text(const Cell& c)
{
    if (const auto* s = std::get_if<std::string>(&c))
        return *s;
    if (const auto* d = std::get_if<double>(&c))
        return format_number(*d);
    return std::to_string(std::get<long long>(c));
}

/// Quotes a field when it holds a comma, quote or line break; quotes are doubled.
inline std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

struct Table {
    std::string name;  ///< file stem
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row)
    {
        if (row.size() != columns.size())
            throw IoError("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                          std::to_string(columns.size()));
        rows.push_back(std::move(row));
    }

    /// Index of `column`; throws when absent.
    std::size_t index(const std::string& column) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == column)
                return i;
        throw IoError("table " + name + ": no column " + column);
    }
};

struct Provenance {
    std::uint64_t seed = 0;
    std::string scenario_hash;
};

/// CSV text with the provenance columns seed and scenario_hash appended to every row.
inline std::string csv_text(const Table& t, const Provenance& p)
{
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out += csv_escape(t.columns[i]) + ",";
    out += "seed,scenario_hash\n";
    const std::string tail = std::to_string(p.seed) + "," + csv_escape(p.scenario_hash) + "\n";
    for (const auto& row : t.rows) {
        for (const Cell& c : row)
            out += csv_escape(cell_text(c)) + ",";
        out += tail;
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
    if (!out)
        throw IoError("write failed for " + path.string());
}

/// ISO 8601 UTC timestamp.
inline std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace oirs

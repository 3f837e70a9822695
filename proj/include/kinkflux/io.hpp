#pragma once

#include "kinkflux/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace kinkflux {

// --- key/value config (TOML subset) ---------------------------------------------------------

using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

/// Flat TOML subset: `key = value` lines, `#` comments, `[table]` headers (keys become
/// "table.key"), basic strings, integers, floats, booleans and flat numeric arrays.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text, const std::string& origin = "<string>");
    static ConfigFile load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    double number(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::string string(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;

    /// Keys never read through an accessor (typos show up here).
    std::vector<std::string> unused() const;
    const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }

private:
    const ConfigValue& get(const std::string& key) const;

    std::string origin_;
    std::map<std::string, ConfigValue> values_;
    mutable std::map<std::string, bool> used_;
};

// --- CSV (RFC 4180) ------------------------------------------------------------------------

/// Shortest round-trip form is not needed; 17 significant digits always round-trips.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

/// Quotes fields containing comma, quote, CR or LF; CRLF record separators.
std::string csv_escape(const std::string& field);
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Builder for numeric tables.
class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> header) { table_.header = std::move(header); }
    CsvBuilder& row(const std::vector<std::string>& fields);
    CsvBuilder& row(const std::vector<double>& fields);
    const CsvTable& table() const noexcept { return table_; }

private:
    CsvTable table_;
};

// --- binary snapshots ----------------------------------------------------------------------

/// Layout (all little-endian):
///   8 bytes  magic "KFXSNAP1"
///   u64      config hash
///   u64      points N
///   f64      half_length L
///   u64      frame count F
///   F frames of { f64 time, N x f64 values }
struct SnapshotFile {
    std::uint64_t config_hash = 0;
    PeriodicGrid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> frames;
};

void write_snapshot(const std::filesystem::path& path, const SnapshotFile& snap);
SnapshotFile read_snapshot(const std::filesystem::path& path);

}  // namespace kinkflux

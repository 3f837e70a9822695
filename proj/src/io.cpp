#include "kinkflux/io.hpp"

#include "kinkflux/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kinkflux {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool bare_key(const std::string& k) {
    if (k.empty()) return false;
    return std::all_of(k.begin(), k.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

// Drop a trailing comment, ignoring '#' inside a basic string.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_str && c == '\\') {
            ++i;
            continue;
        }
        if (c == '"') in_str = !in_str;
        if (c == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

double parse_number(std::string s, const std::string& where) {
    std::erase(s, '_');
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "+nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    const char* b = s.data();
    if (!s.empty() && s[0] == '+') ++b;
    double v = 0.0;
    const auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError(where + ": not a number: '" + s + "'");
    return v;
}

ConfigValue parse_value(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError(where + ": missing value");
    if (s.front() == '"') {
        std::string out;
        std::size_t i = 1;
        for (; i < s.size() && s[i] != '"'; ++i) {
            if (s[i] == '\\' && i + 1 < s.size()) {
                const char e = s[++i];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: throw ConfigError(where + ": unsupported escape \\" + std::string(1, e));
                }
            } else {
                out += s[i];
            }
        }
        if (i >= s.size() || trim(s.substr(i + 1)) != "") throw ConfigError(where + ": malformed string");
        return out;
    }
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError(where + ": arrays must close on the same line");
        std::vector<double> out;
        std::stringstream ss(s.substr(1, s.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;  // trailing comma
            out.push_back(parse_number(item, where));
        }
        return out;
    }
    const bool looks_float = s.find_first_of(".eE") != std::string::npos || s.find("inf") != std::string::npos ||
                             s.find("nan") != std::string::npos;
    if (looks_float) return parse_number(s, where);
    std::string digits = s;
    std::erase(digits, '_');
    std::int64_t v = 0;
    const char* b = digits.data();
    if (!digits.empty() && digits[0] == '+') ++b;
    const auto [p, ec] = std::from_chars(b, digits.data() + digits.size(), v);
    if (ec != std::errc{} || p != digits.data() + digits.size()) throw ConfigError(where + ": cannot parse '" + s + "'");
    return v;
}

template <class T>
void put_le(std::string& buf, T v) {
    static_assert(std::is_trivially_copyable_v<T> && sizeof(T) == 8);
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char raw[8];
    std::memcpy(raw, &bits, 8);
    buf.append(raw, 8);
}

template <class T>
T get_le(const std::string& buf, std::size_t& pos, const std::filesystem::path& path) {
    if (pos + 8 > buf.size()) throw IoError(path.string() + ": truncated snapshot");
    std::uint64_t bits = 0;
    std::memcpy(&bits, buf.data() + pos, 8);
    pos += 8;
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    return std::bit_cast<T>(bits);
}

constexpr std::array<char, 8> snapshot_magic = {'K', 'F', 'X', 'S', 'N', 'A', 'P', '1'};

}  // namespace

// --- config --------------------------------------------------------------------------------

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::stringstream ss(text);
    std::string line, table;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) throw ConfigError(where + ": malformed table header");
            table = trim(line.substr(1, line.size() - 2));
            if (!bare_key(table)) throw ConfigError(where + ": bad table name '" + table + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!bare_key(key)) throw ConfigError(where + ": bad key '" + key + "'");
        if (!table.empty()) key = table + "." + key;
        if (cfg.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        cfg.values_[key] = parse_value(line.substr(eq + 1), where);
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) { return parse(read_text(path), path.string()); }

const ConfigValue& ConfigFile::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
    used_[key] = true;
    return it->second;
}

double ConfigFile::number(const std::string& key) const {
    const auto& v = get(key);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw ConfigError(origin_ + ": '" + key + "' must be a number");
}

std::int64_t ConfigFile::integer(const std::string& key) const {
    const auto& v = get(key);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw ConfigError(origin_ + ": '" + key + "' must be an integer");
}

bool ConfigFile::boolean(const std::string& key) const {
    const auto& v = get(key);
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw ConfigError(origin_ + ": '" + key + "' must be true or false");
}

std::string ConfigFile::string(const std::string& key) const {
    const auto& v = get(key);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError(origin_ + ": '" + key + "' must be a string");
}

std::vector<double> ConfigFile::numbers(const std::string& key) const {
    const auto& v = get(key);
    if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
    if (const auto* d = std::get_if<double>(&v)) return {*d};
    if (const auto* i = std::get_if<std::int64_t>(&v)) return {static_cast<double>(*i)};
    throw ConfigError(origin_ + ": '" + key + "' must be a numeric array");
}

std::vector<std::string> ConfigFile::unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!used_.count(k)) out.push_back(k);
    return out;
}

// --- CSV -----------------------------------------------------------------------------------

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf.data(), p);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(fields[i]);
        }
        out += "\r\n";
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    return out;
}

CsvTable parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool in_quotes = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            rec.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(rec));
            rec.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (in_quotes) throw IoError("csv: unterminated quoted field");
    if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
    }
    CsvTable t;
    if (records.empty()) return t;
    t.header = std::move(records.front());
    t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    return t;
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError("csv: no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
    const auto& s = rows.at(row).at(column(name));
    return parse_number(s, "csv column " + name);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(path.string() + ": cannot open for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError(path.string() + ": write failed");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) { write_text(path, to_csv(table)); }

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

CsvBuilder& CsvBuilder::row(const std::vector<std::string>& fields) {
    if (fields.size() != table_.header.size()) throw ArgumentError("csv: row width does not match header");
    table_.rows.push_back(fields);
    return *this;
}

CsvBuilder& CsvBuilder::row(const std::vector<double>& fields) {
    std::vector<std::string> s;
    s.reserve(fields.size());
    for (double v : fields) s.push_back(format_double(v));
    return row(s);
}

// --- snapshots -----------------------------------------------------------------------------

void write_snapshot(const std::filesystem::path& path, const SnapshotFile& snap) {
    if (snap.times.size() != snap.frames.size()) throw ArgumentError("snapshot: times and frames differ in length");
    for (const auto& f : snap.frames)
        if (f.size() != snap.grid.points) throw ArgumentError("snapshot: frame size does not match grid");
    std::string buf(snapshot_magic.begin(), snapshot_magic.end());
    put_le(buf, snap.config_hash);
    put_le(buf, static_cast<std::uint64_t>(snap.grid.points));
    put_le(buf, snap.grid.half_length);
    put_le(buf, static_cast<std::uint64_t>(snap.frames.size()));
    for (std::size_t i = 0; i < snap.frames.size(); ++i) {
        put_le(buf, snap.times[i]);
        for (double v : snap.frames[i]) put_le(buf, v);
    }
    write_text(path, buf);
}

SnapshotFile read_snapshot(const std::filesystem::path& path) {
    const std::string buf = read_text(path);
    if (buf.size() < 8 || !std::equal(snapshot_magic.begin(), snapshot_magic.end(), buf.begin()))
        throw IoError(path.string() + ": not a snapshot file");
    std::size_t pos = 8;
    SnapshotFile s;
    s.config_hash = get_le<std::uint64_t>(buf, pos, path);
    s.grid.points = static_cast<std::size_t>(get_le<std::uint64_t>(buf, pos, path));
    s.grid.half_length = get_le<double>(buf, pos, path);
    const auto frames = get_le<std::uint64_t>(buf, pos, path);
    if (frames > (buf.size() - pos) / 8) throw IoError(path.string() + ": frame count exceeds file size");
    for (std::uint64_t f = 0; f < frames; ++f) {
        s.times.push_back(get_le<double>(buf, pos, path));
        std::vector<double> v(s.grid.points);
        for (auto& x : v) x = get_le<double>(buf, pos, path);
        s.frames.push_back(std::move(v));
    }
    if (pos != buf.size()) throw IoError(path.string() + ": trailing bytes after last frame");
    return s;
}

}  // namespace kinkflux

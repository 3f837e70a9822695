#include "doctest.h"

#include "kinkflux/error.hpp"
#include "kinkflux/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace kinkflux;

namespace {
std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "kinkflux_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}
}  // namespace

TEST_CASE("config subset parses scalars, arrays and tables") {
    const auto f = ConfigFile::parse(R"(
# comment
epsilon = 1e-2
points = 2048
reduced = true
name = "run # one"
times = [0.25, 0.5, 1]
[extra]
depth = 3
)");
    CHECK(f.number("epsilon") == 1e-2);
    CHECK(f.integer("points") == 2048);
    CHECK(f.number("points") == 2048.0);
    CHECK(f.boolean("reduced"));
    CHECK(f.string("name") == "run # one");
    CHECK(f.numbers("times") == std::vector<double>{0.25, 0.5, 1.0});
    CHECK(f.has("extra.depth"));
    CHECK(f.unused() == std::vector<std::string>{"extra.depth"});
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(ConfigFile::parse("x 1"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("x = 1\nx = 2"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("x = \"open"), ConfigError);
    const auto f = ConfigFile::parse("x = \"s\"");
    CHECK_THROWS_AS(f.number("x"), ConfigError);
    CHECK_THROWS_AS(f.number("missing"), ConfigError);
}

TEST_CASE("CSV quoting and 17-digit round trip") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("two\nlines") == "\"two\nlines\"");

    const double vals[] = {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::numeric_limits<double>::denorm_min()};
    CsvBuilder b({"name", "value"});
    for (double v : vals) b.row({std::string("x, \"q\""), format_double(v)});
    const auto text = to_csv(b.table());
    CHECK(text.find("\r\n") != std::string::npos);
    const auto back = parse_csv(text);
    REQUIRE(back.rows.size() == std::size(vals));
    for (std::size_t i = 0; i < back.rows.size(); ++i) {
        CHECK(back.rows[i][0] == "x, \"q\"");
        CHECK(back.number(i, "value") == vals[i]);
    }
    CHECK_THROWS(back.column("nope"));
}

TEST_CASE("CSV files round trip") {
    const auto p = scratch("t.csv");
    CsvBuilder b({"a", "b"});
    b.row(std::vector<double>{1.5, -2.0});
    write_csv(p, b.table());
    const auto t = read_csv(p);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.number(0, "b") == -2.0);
}

TEST_CASE("snapshot round trip and truncation") {
    SnapshotFile s;
    s.config_hash = 0xDEADBEEFCAFEF00Dull;
    s.grid = PeriodicGrid{4.0, 8};
    s.times = {0.0, 0.5};
    s.frames = {std::vector<double>(8, 1.25), {1, 2, 3, 4, 5, 6, 7, 8}};
    const auto p = scratch("s.kfx");
    write_snapshot(p, s);
    const auto r = read_snapshot(p);
    CHECK(r.config_hash == s.config_hash);
    CHECK(r.grid.points == 8);
    CHECK(r.grid.half_length == 4.0);
    CHECK(r.times == s.times);
    CHECK(r.frames == s.frames);

    std::filesystem::resize_file(p, std::filesystem::file_size(p) - 3);
    CHECK_THROWS_AS(read_snapshot(p), IoError);
    { std::ofstream(p, std::ios::binary) << "NOTASNAPSHOT-----------------------------"; }
    CHECK_THROWS_AS(read_snapshot(p), IoError);
}

#include "doctest.h"

#include "kinkflux/error.hpp"
#include "kinkflux/harness.hpp"
#include "nlohmann/json.hpp"

#include <cmath>
#include <filesystem>

using namespace kinkflux;

namespace {
ExperimentConfig tiny(std::size_t paths) {
    ExperimentConfig c = preset_config(Preset::reduced, 1e-2);
    c.sim.half_length = 16.0;
    c.sim.points = 512;
    c.sim.dt = 0.02;
    c.paths = paths;
    c.threads = 1;
    c.finalize();
    return c;
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "kinkflux_unit" / name;
    std::filesystem::remove_all(dir);
    return dir;
}
}  // namespace

TEST_CASE("presets and validation") {
    const auto r = preset_config(Preset::reduced);
    CHECK(r.paths == 50);
    CHECK(preset_config(Preset::full).paths == 400);
    CHECK(r.sim.horizon == doctest::Approx(10.0));
    CHECK(r.rescale_exponent() == doctest::Approx(-0.375));
    CHECK(parse_preset("full") == Preset::full);
    CHECK_THROWS_AS(parse_preset("huge"), ConfigError);
    CHECK(full_preset_epsilons().size() >= 3);

    auto bad = r;
    bad.gamma = 2.0 / 3.0;
    CHECK_THROWS_AS(bad.finalize(), ConfigError);
    bad = r;
    bad.times = TimeGrid{{1.0, 0.5}};
    CHECK_THROWS(bad.finalize());
}

TEST_CASE("observation times round to the nearest step") {
    auto c = preset_config(Preset::reduced);
    const auto steps = c.observation_steps();
    REQUIRE(steps.size() == 3);
    CHECK(steps[0] == 250);
    CHECK(steps[2] == 1000);
}

TEST_CASE("config hash is sensitive to every design field") {
    const auto a = preset_config(Preset::reduced);
    auto b = a;
    CHECK(a.hash() == b.hash());
    b.gamma = 0.4;
    CHECK(a.hash() != b.hash());
    b = a;
    b.sim.seed += 1;
    CHECK(a.hash() != b.hash());
    b = a;
    b.paths += 1;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("load_experiment reads keys and rejects unknown ones") {
    const auto f = ConfigFile::parse("epsilon = 0.003\ngamma = 0.25\ntimes = [0.5, 1.0]\npaths = 7\n");
    auto c = load_experiment(f, preset_config(Preset::reduced));
    CHECK(c.sim.epsilon == 0.003);
    CHECK(c.gamma == 0.25);
    CHECK(c.paths == 7);
    CHECK(c.times.times == std::vector<double>{0.5, 1.0});
    CHECK_THROWS_AS(load_experiment(ConfigFile::parse("epsilonn = 0.1\n")), ConfigError);
}

TEST_CASE("scaling fit recovers an injected exponent") {
    std::vector<ScalingPoint> pts;
    for (double e : {1e-2, 3e-3, 1e-3}) pts.push_back({e, 4.2 * std::pow(e, 0.75), 0.0});
    const auto fit = scaling_fit(pts, 0.5);
    CHECK(std::abs(fit.slope - 0.75) < 1e-12);
    CHECK(fit.target == 0.75);
    CHECK(std::exp(fit.intercept) == doctest::Approx(4.2).epsilon(1e-10));
    CHECK_THROWS_AS(scaling_fit({pts[0], pts[1]}, 0.5), DesignError);
    std::vector<ScalingPoint> narrow{{1e-2, 1, 0}, {5e-3, 1, 0}, {2e-3, 1, 0}};
    CHECK_THROWS_AS(scaling_fit(narrow, 0.5), DesignError);
}

TEST_CASE("noise-free ensemble sits on the kink") {
    auto c = tiny(3);
    c.sim.epsilon = 0.0;
    c.gamma = 0.0;
    c.finalize();
    const auto s = run_ensemble(c);
    CHECK(s.exclusions.empty());
    for (double v : s.zeta.data) CHECK(std::abs(v) < 1e-10);
    const auto t = tube_report(s, c.eta);
    CHECK(t.threshold == 1e-6);
    CHECK(t.exceed == 0);
}

TEST_CASE("single-path ensemble reports no data") {
    const auto s = run_ensemble(tiny(1));
    const auto dir = scratch("nodata");
    write_report(s, dir, ensemble_criteria(s));
    const auto m = nlohmann::json::parse(read_text(dir / "manifest.json"));
    CHECK(m["status"] == "no data");
}

TEST_CASE("report tables do not depend on the worker count") {
    std::vector<std::string> bodies;
    for (std::size_t w : {1u, 4u, 8u}) {
        auto c = tiny(6);
        c.threads = w;
        const auto s = run_ensemble(c);
        const auto dir = scratch("threads" + std::to_string(w));
        write_report(s, dir, ensemble_criteria(s));
        std::string all;
        for (const char* f : {"variance.csv", "covariance.csv", "tube.csv", "exclusions.csv", "series.csv"})
            all += read_text(dir / f);
        bodies.push_back(all);
    }
    CHECK(bodies[0] == bodies[1]);
    CHECK(bodies[0] == bodies[2]);
}

TEST_CASE("check tables carry the expected columns") {
    std::vector<CheckRow> rows{{"a", "p", 1.0, 1.1, 0.1, 0.2, true, true},
                               {"b", "q", 1.0, 2.0, 1.0, 0.2, false, false}};
    const auto k = kernel_check_table(rows);
    CHECK(k.header == std::vector<std::string>{"check_name", "parameter", "residual", "tolerance", "pass"});
    CHECK(k.rows.size() == 2);
    const auto cv = cov_check_table(rows);
    CHECK(cv.header == std::vector<std::string>{"query", "reference", "computed", "gap", "pass"});
}

#include "doctest.h"

#include "kinkflux/error.hpp"
#include "kinkflux/spde.hpp"

#include <cmath>

using namespace kinkflux;

namespace {

SimulationConfig small(double eps) {
    SimulationConfig c;
    c.half_length = 16.0;
    c.points = 512;
    c.dt = 1e-3;
    c.epsilon = eps;
    c.horizon = 0.1;
    c.seed = 7;
    c.allow_small_box = true;
    return c;
}

double sup_diff(const GridProfile& a, const GridProfile& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

}  // namespace

TEST_CASE("config validation") {
    SimulationConfig c = small(1e-2);
    CHECK_NOTHROW(c.validate());
    c.points = 500;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small(1e-2);
    c.dt = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small(1.5);
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small(1e-2);
    c.allow_small_box = false;
    c.horizon = 1e4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(small(1e-2).hash() == small(1e-2).hash());
    CHECK(small(1e-2).hash() != small(1e-3).hash());
}

TEST_CASE("the kink is stationary without noise") {
    const auto c = small(0.0);
    const auto u0 = front_initial(c);
    const auto path = simulate(c, u0);
    CHECK(sup_diff(path.snapshots.back(), u0) < 1e-12);
}

TEST_CASE("noise conserves the spatial mean of the perturbation") {
    const auto c = small(1e-2);
    const auto u0 = front_initial(c);
    const auto path = simulate(c, u0);
    CHECK(std::abs(path.snapshots.back().mean() - u0.mean()) < 1e-12);
    CHECK(sup_diff(path.snapshots.back(), u0) > 1e-3);
}

TEST_CASE("simulation is reproducible per (seed, stream)") {
    const auto c = small(1e-2);
    const auto u0 = front_initial(c);
    const auto a = simulate(c, u0, {}, 3);
    const auto b = simulate(c, u0, {}, 3);
    const auto d = simulate(c, u0, {}, 4);
    CHECK(sup_diff(a.snapshots.back(), b.snapshots.back()) == 0.0);
    CHECK(sup_diff(a.snapshots.back(), d.snapshots.back()) > 0.0);
}

TEST_CASE("observer sees stride and explicit steps") {
    auto c = small(1e-2);
    SimulateOptions o;
    o.observe_every = 25;
    o.observe_at = {7, 33};
    std::vector<std::size_t> seen;
    o.observer = [&](std::size_t n, double, const GridProfile&) { seen.push_back(n); };
    simulate(c, front_initial(c), o);
    CHECK(seen == std::vector<std::size_t>{0, 7, 25, 33, 50, 75, 100});
}

TEST_CASE("Picard oracle agrees with the spectral stepper at t = 0.1") {
    for (double eps : {1e-2, 1e-3}) {
        const auto c = small(eps);
        const auto u0 = front_initial(c);
        SimulateOptions o;
        o.retain_forcing = true;
        const auto path = simulate(c, u0, o);
        const auto r = picard_solve(c, u0, path.forcing, 0.1);
        CHECK(r.converged);
        CHECK(r.iterations > 1);
        CHECK(sup_diff(r.solution, path.snapshots.back()) < 1e-4);
    }
}

TEST_CASE("blow-up is reported with its time") {
    SimulationConfig c;
    c.half_length = 12.8;
    c.points = 512;
    c.dt = 0.025;
    c.epsilon = 0.99;
    c.horizon = 20.0;
    c.unit_cutoff = true;
    c.allow_small_box = true;
    GridProfile u0 = front_initial(c);
    for (auto& v : u0.values) v *= 2.0;
    CHECK_THROWS_AS(simulate(c, u0), BlowUpError);
    for (auto& v : u0.values) v *= 2.0;
    CHECK_THROWS_AS(simulate(c, u0), ArgumentError);
}

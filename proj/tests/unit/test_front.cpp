#include "doctest.h"

#include "kinkflux/error.hpp"
#include "kinkflux/front.hpp"
#include "kinkflux/kernels.hpp"

#include <cmath>

using namespace kinkflux;

namespace {
const PeriodicGrid grid{32.0, 1024};
}

TEST_CASE("center recovers an exact translate") {
    for (double c : {-0.37, 0.0, 0.12, 0.8}) {
        const auto u = FrontProfile{c}.sample(grid);
        const auto r = center(u);
        CHECK(r.center == doctest::Approx(c).epsilon(1e-9));
        CHECK(std::abs(r.residual) < 1e-10);
        CHECK(r.manifold_distance < 1e-6);
    }
}

TEST_CASE("orthogonality residual is increasing in c near the root") {
    auto u = FrontProfile{0.2}.sample(grid);
    CHECK(center_residual(u, 0.1) < 0.0);
    CHECK(center_residual(u, 0.3) > 0.0);
    CHECK(center_residual_derivative(u, 0.2) > 0.0);
}

TEST_CASE("center expansion converges at the expected orders") {
    const FrontProfile m;
    for (double a : {0.02, 0.01}) {
        auto u = m.sample(grid);
        for (std::size_t i = 0; i < grid.points; ++i) u.values[i] += a * std::exp(-std::pow(grid.x(i) - 0.5, 2));
        const double c = center(u).center;
        const double e1 = std::abs(center_approx(u, 1) - c);
        const double e2 = std::abs(center_approx(u, 2) - c);
        CHECK(e1 < 5.0 * a * a);
        CHECK(e2 < 5.0 * a * a * a);
    }
}

TEST_CASE("profiles outside the tube or without a front are rejected") {
    auto u = FrontProfile{}.sample(grid);
    for (std::size_t i = 0; i < grid.points; ++i) u.values[i] += 0.5 * std::exp(-std::pow(grid.x(i) - 5.0, 2));
    CHECK_THROWS_AS(center(u), OutOfTubeError);
    GridProfile flat(grid, std::vector<double>(grid.points, 1.0));
    CenterOptions o;
    o.check_tube = false;
    CHECK_THROWS_AS(center(flat, o), NotNearFrontError);
}

TEST_CASE("shift_profile translates the kink") {
    const auto u = FrontProfile{0.1}.sample(grid);
    const auto s = shift_profile(u, 0.25);
    CHECK(center(s).center == doctest::Approx(0.35).epsilon(1e-8));
    CHECK(sup_distance(s, 0.35) < 1e-8);
    CHECK(manifold_distance(s) < 1e-6);
}

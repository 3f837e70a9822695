#include "doctest.h"

#include "kinkflux/covlab.hpp"
#include "kinkflux/error.hpp"

#include <cmath>
#include <numbers>

using namespace kinkflux;

TEST_CASE("variance of Y grows like t^{1/4}") {
    CHECK(y_variance_coefficient() == doctest::Approx(std::tgamma(0.75) / std::numbers::pi).epsilon(1e-14));
    CHECK(y_variance_coefficient() == doctest::Approx(0.39006225).epsilon(1e-7));
    for (double t : {0.5, 1.0, 4.0}) {
        CovQuery q{0.3, t, 0.3, t};
        CHECK(cov_Y(q) == doctest::Approx(y_variance_coefficient() * std::pow(t, 0.25)).epsilon(1e-4));
    }
    CHECK(cov_Y(CovQuery{0.0, 0.0, 0.0, 1.0}) == 0.0);
}

TEST_CASE("cov_Y is symmetric in its two points") {
    const CovQuery a{0.2, 1.0, -0.5, 2.0};
    const CovQuery b{-0.5, 2.0, 0.2, 1.0};
    CHECK(cov_Y(a) == doctest::Approx(cov_Y(b)).epsilon(1e-5));
}

TEST_CASE("Y increments match frozen values") {
    CHECK(y_spatial_increment(0.0, 1e-2, 1.0) == doctest::Approx(9.97114839e-3).epsilon(1e-6));
    CHECK(y_temporal_increment(0.0, 1.0, 0.1) == doctest::Approx(0.36873007002847).epsilon(1e-6));
}

TEST_CASE("h2 covariance closed form") {
    const double c = 1.0 / std::sqrt(8.0 * std::numbers::pi);
    CHECK(h2_covariance(1.0, 1.0) == doctest::Approx(c * std::sqrt(2.0)));
    CHECK(h2_covariance(2.0, 1.0) == doctest::Approx(c * (std::sqrt(3.0) - 1.0)));
    CHECK(h2_covariance(0.0, 3.0) == 0.0);
    CHECK(h2_covariance(2.0, 1.0) == doctest::Approx(h2_covariance(1.0, 2.0)));
}

TEST_CASE("h2 lattice sampler matches its exact lattice covariance") {
    const TimeGrid g{{0.5, 1.0}};
    const auto h = sample_h2(g, 3000, 9);
    CHECK(h.max_lattice_deviation < 0.02);
    CHECK_FALSE(h.under_resolved);
    CHECK(compare_covariance(h.batch, h.lattice_covariance).max_abs_z < 4.0);
}

namespace {
SimulationConfig h_config() {
    SimulationConfig c;
    c.half_length = 32.0;
    c.points = 1024;
    c.dt = 0.01;
    c.epsilon = 1e-2;
    c.horizon = 2.0;
    return c;
}
}  // namespace

TEST_CASE("H from the fixed-point route equals the linearized stepper") {
    const auto c = h_config();
    SimulateOptions o;
    o.retain_forcing = true;
    const auto path = simulate(c, front_initial(c), o);
    const auto y = replay_y(c, path.forcing);
    const auto fixed = h_from_y(y);
    const auto direct = direct_h(c, path.forcing);
    REQUIRE(fixed.path.size() == direct.size());
    double gap = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < direct.size(); ++n)
        for (std::size_t i = 0; i < c.points; ++i) {
            gap = std::max(gap, std::abs(fixed.path[n].values[i] - direct[n].values[i]));
            scale = std::max(scale, std::abs(direct[n].values[i]));
        }
    CHECK(scale > 0.0);
    CHECK(gap < 1e-3 * scale);
    CHECK(fixed.identity_residual < 1e-8);

    // H is linear in the draws
    auto doubled = path.forcing;
    for (auto& f : doubled)
        for (auto& d : f.draws) d *= 2.0;
    const auto d2 = direct_h(c, doubled);
    for (std::size_t i = 0; i < c.points; i += 37)
        CHECK(d2.back().values[i] == doctest::Approx(2.0 * direct.back().values[i]).epsilon(1e-10));

    // zero noise gives H = 0
    for (auto& f : doubled)
        for (auto& d : f.draws) d = 0.0;
    const auto zero = direct_h(c, doubled);
    for (double v : zero.back().values) REQUIRE(v == 0.0);
}

TEST_CASE("matched center variance is increasing and scales with eps") {
    auto c = h_config();
    const auto a = matched_center_variance(c, {0.5, 1.0, 2.0});
    CHECK(a[0] > 0.0);
    CHECK(a[0] < a[1]);
    CHECK(a[1] < a[2]);
    c.epsilon = 2e-2;
    const auto b = matched_center_variance(c, {0.5, 1.0, 2.0});
    CHECK(b[2] == doctest::Approx(2.0 * a[2]).epsilon(1e-10));
}

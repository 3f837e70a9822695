#include "doctest.h"

#include "kinkflux/error.hpp"
#include "kinkflux/grid.hpp"
#include "kinkflux/rng.hpp"
#include "kinkflux/stats.hpp"

#include <cmath>

using namespace kinkflux;

TEST_CASE("periodic grid geometry") {
    const PeriodicGrid g{8.0, 64};
    CHECK(g.dx() == doctest::Approx(0.25));
    CHECK(g.x(0) == -8.0);
    CHECK(g.nearest_index(0.26) == 33);
    CHECK(g.nearest_index(7.99) == 0);  // wraps
    CHECK(g.modes() == 33);
}

TEST_CASE("real FFT round trip and trapezoid integral") {
    const PeriodicGrid g{10.0, 256};
    GridProfile p(g);
    for (std::size_t i = 0; i < g.points; ++i) p.values[i] = std::exp(-g.x(i) * g.x(i));
    RealFft fft(g.points);
    const auto back = fft.inverse(fft.forward(p));
    for (std::size_t i = 0; i < g.points; ++i) REQUIRE(back.values[i] == doctest::Approx(p.values[i]).epsilon(1e-13));
    CHECK(p.integral() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
}

TEST_CASE("line and power-law fits are exact on exact data") {
    std::vector<double> x{1, 2, 3, 4, 5}, y;
    for (double v : x) y.push_back(2.5 - 0.75 * v);
    const auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(f.r_squared == doctest::Approx(1.0));

    const auto ts = logspace(1.0, 1e4, 9);
    std::vector<double> p;
    for (double t : ts) p.push_back(3.0 * std::pow(t, 0.5));
    CHECK(fit_power_law(ts, p).slope == doctest::Approx(0.5).epsilon(1e-12));
    p[0] = -1.0;
    CHECK_THROWS_AS(fit_power_law(ts, p), ArgumentError);
}

TEST_CASE("dominant-power fit separates the log and constant terms") {
    const auto ts = logspace(100.0, 1e4, 7);
    std::vector<double> y;
    for (double t : ts) y.push_back(0.28 * std::sqrt(t) - 0.08 * std::log(t) + 0.4);
    const auto f = fit_dominant_power(ts, y);
    CHECK(f.exponent == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(f.amplitude == doctest::Approx(0.28).epsilon(1e-5));
    CHECK(f.log_coefficient == doctest::Approx(-0.08).epsilon(1e-4));
}

TEST_CASE("empirical covariance is unbiased on a synthetic Gaussian batch") {
    // X_2 = X_1 + independent, Var X_1 = 1, Var X_2 = 2, Cov = 1
    const std::size_t n = 40000;
    Matrix s(n, 2);
    RngStream r(17);
    for (std::size_t p = 0; p < n; ++p) {
        s(p, 0) = r.normal();
        s(p, 1) = s(p, 0) + r.normal();
    }
    const auto c = empirical_covariance(s, {1.0, 2.0});
    const double target[2][2] = {{1.0, 1.0}, {1.0, 2.0}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(c.values(i, j) - target[i][j]) < 3.0 * c.standard_errors(i, j));
            CHECK(c.standard_errors(i, j) > 0.0);
        }
    CHECK(c.values(0, 1) == c.values(1, 0));
}

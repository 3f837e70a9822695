#include "doctest.h"

#include "kinkflux/error.hpp"
#include "kinkflux/kernels.hpp"

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <cmath>
#include <numbers>

using namespace kinkflux;

TEST_CASE("phi at the origin matches the Gamma closed form") {
    const double closed = std::tgamma(1.25) * std::pow(2.0, 0.25) / std::numbers::pi;
    CHECK(phi_eval(0.0, 0) == doctest::Approx(closed).epsilon(1e-12));
    CHECK(std::abs(phi_eval(0.0, 0) - 0.3431063138) < 1e-9);
}

TEST_CASE("phi table against an independent Fourier-integral oracle") {
    // (1/pi) int_0^inf e^{-w^4/2} cos(wx) dw by Ooura's double-exponential rule
    boost::math::quadrature::ooura_fourier_cos<double> cosine;
    for (double x : {0.5, 1.0, 2.75, 6.0}) {
        const auto [v, err] = cosine.integrate([](double w) { return std::exp(-0.5 * w * w * w * w); }, x);
        CHECK(phi_eval(x, 0) == doctest::Approx(v / std::numbers::pi).epsilon(1e-9));
    }
    // 60-digit contour quadrature
    CHECK(phi_eval(1.0, 1) == doctest::Approx(-0.13737602298606).epsilon(1e-10));
    CHECK(phi_eval(1.0, 2) == doctest::Approx(-0.0878996182894549).epsilon(1e-10));
    CHECK(std::abs(phi_eval(16.0, 0) - 1.63359738997929e-7) < 1e-12);
}

TEST_CASE("phi parity and the self-similar ODE") {
    for (double x : {0.3, 1.1, 4.2})
        for (int k = 0; k <= 2; ++k) CHECK(phi_eval(-x, k) == doctest::Approx((k % 2 ? -1 : 1) * phi_eval(x, k)));
    for (double x : {0.5, 2.0, 3.5}) CHECK(phi_direct(x, 3) == doctest::Approx(0.5 * x * phi_direct(x, 0)).epsilon(1e-9));
}

TEST_CASE("free kernel G") {
    CHECK(green_G(0.0, 0.0, 16.0) == doctest::Approx(0.1715531569).epsilon(1e-9));
    CHECK(green_G(1.0, 0.2, 2.0) == doctest::Approx(green_G(0.2, 1.0, 2.0)));
    double mass = 0.0;
    for (int i = -3000; i < 3000; ++i) mass += green_G(i * 0.01, 0.0, 0.5);
    CHECK(mass * 0.01 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(green_G(0.0, 0.0, 0.0), DomainError);
}

TEST_CASE("K_inf mass and quadrature cross-check") {
    double mass = 0.0;
    for (int i = -2000; i < 2000; ++i) mass += kinf_eval(i * 0.01, 1.0);
    CHECK(mass * 0.01 == doctest::Approx(1.0).epsilon(1e-8));
    boost::math::quadrature::ooura_fourier_cos<double> cosine;
    const auto [v, err] = cosine.integrate([](double w) { return std::exp(-(0.5 * w * w * w * w + 2.0 * w * w)); }, 1e-12);
    CHECK(kinf_eval(0.0, 1.0) == doctest::Approx(v / std::numbers::pi).epsilon(1e-8));
    CHECK_THROWS_AS(kinf_eval(0.0, -1.0), DomainError);
}

TEST_CASE("K* symmetry, decay and the d_x K* first term") {
    CHECK(kstar_eval(1.0, 1.0, 2.0) == kstar_eval(1.0, 1.0, 2.0));
    CHECK(kstar_eval(0.4, -2.0, 3.0, 1, 1) == doctest::Approx(kstar_eval(-2.0, 0.4, 3.0, 1, 1)));
    // every K* term carries sign(xy)
    CHECK(kstar_eval(0.7, 0.0, 5.0) == 0.0);
    CHECK_THROWS_AS(kstar_eval(0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("cutoff bump") {
    CHECK(cutoff_eval(0.0, 0.1, 2.5) == 1.0);
    const double edge = std::pow(0.1, -2.5);
    CHECK(cutoff_eval(edge, 0.1, 2.5) == 0.0);
    CHECK(cutoff_eval(-1.5 * edge, 0.1, 2.5) == 0.0);
    CHECK(cutoff_eval(0.5 * edge, 0.1, 2.5) == doctest::Approx(std::exp(1.0 - 4.0 / 3.0)).epsilon(1e-12));
    CHECK(cutoff_eval(0.5 * edge, 0.1, 2.5) == doctest::Approx(0.716531).epsilon(1e-6));
    CHECK(CutoffFunction::identity()(1e9) == 1.0);
}

TEST_CASE("front profile identities") {
    const FrontProfile m;
    CHECK(m.d1(0.0) == 1.0);
    CHECK(m.potential_curvature(0.0) == -1.0);
    CHECK(varphi(0.0) == 1.0);
    CHECK(varphi(-2.0) == varphi(2.0));
    CHECK(sgn(0.0) == 0.0);
    const PeriodicGrid g{40.0, 8192};
    CHECK(m.sample_d1(g).values.size() == g.points);
    double s = 0.0;
    for (double v : m.sample_d1(g).values) s += v * v;
    CHECK(s * g.dx() == doctest::Approx(FrontProfile::translation_norm2).epsilon(1e-10));
}

TEST_CASE("numerical K: mass, symmetry and validity window") {
    const PeriodicGrid g{32.0, 2048};
    LinearizedSemigroup sg(g, 0.01);
    const auto a = sg.column(0.5, 1.0);
    CHECK(a.integral() == doctest::Approx(1.0).epsilon(1e-6));
    const double xa = g.x(g.nearest_index(0.5)), xb = g.x(g.nearest_index(-1.0));
    const auto ka = sg.column(xa, 1.0);
    const auto kb = sg.column(xb, 1.0);
    // not symmetric: the generator is self-adjoint only in H^-1
    CHECK(kb.integral() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ka.values[g.nearest_index(xb)] != doctest::Approx(kb.values[g.nearest_index(xa)]).epsilon(1e-8));
    CHECK_THROWS_AS(LinearizedSemigroup::validate(PeriodicGrid{32.0, 512}, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(LinearizedSemigroup::validate(g, 0.0, 1e-7), ConfigError);
    CHECK_THROWS_AS(LinearizedSemigroup::validate(g, 0.0, 100.0), ConfigError);
}

TEST_CASE("numerical K semigroup") {
    const PeriodicGrid g{48.0, 2048};
    LinearizedSemigroup sg(g, 0.01);
    const double x0 = g.x(g.nearest_index(0.5)), y0 = g.x(g.nearest_index(-0.8));
    const auto a = sg.column(x0, 2.0);
    const auto b = sg.column(y0, 3.0);
    const auto c = sg.column(y0, 5.0);
    double ip = 0.0;
    for (std::size_t i = 0; i < g.points; ++i) ip += a.values[i] * b.values[i];
    CHECK(std::abs(ip * g.dx() - c.values[g.nearest_index(x0)]) < 1e-4);
}

TEST_CASE("small-time K stays close to K_inf") {
    const PeriodicGrid g{32.0, 2048};
    const auto k = semigroup_K(0.0, 0.05, g);
    double m = 0.0;
    for (std::size_t i = 0; i < g.points; ++i) m = std::max(m, std::abs(k.values[i] - kinf_eval(g.x(i), 0.05)));
    CHECK(m < 0.2);
    CHECK(m > 0.0);
}

#include "doctest.h"

#include "kinkflux/error.hpp"
#include "kinkflux/limit.hpp"

#include <cmath>

using namespace kinkflux;

TEST_CASE("cov_r closed forms") {
    CHECK(cov_r(1.0, 1.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(cov_r(2.0, 1.0) == doctest::Approx(std::sqrt(3.0) - 1.0));
    CHECK(cov_r(0.0, 1.0) == 0.0);
    // self-similarity of order 1/4
    for (auto [t, s] : {std::pair{1.0, 0.5}, std::pair{0.3, 0.9}, std::pair{2.0, 2.0}})
        CHECK(cov_r(4 * t, 4 * s) == doctest::Approx(2.0 * cov_r(t, s)).epsilon(1e-14));
    CHECK(cov_r(4.0, 2.0) == doctest::Approx(std::sqrt(6.0) - std::sqrt(2.0)));
    const double inc = cov_r(1, 2) - cov_r(1, 1.5) - cov_r(0.5, 2) + cov_r(0.5, 1.5);
    CHECK(std::abs(inc + 0.0841) < 2e-4);
}

TEST_CASE("representation constants") {
    CHECK(volterra_kernel_covariance(1.0, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(volterra_kernel_covariance(2.0, 1.0) == doctest::Approx(cov_r(2.0, 1.0)).epsilon(1e-6));
    for (auto [t, s] : {std::pair{1.0, 0.3}, std::pair{0.7, 0.7}, std::pair{2.5, 1.1}})
        CHECK(4.0 * (fbm_cov(t, s, 0.25) - fbm_cov(t, -s, 0.25)) / 2.0 ==
              doctest::Approx(cov_r(t, s)).epsilon(1e-10));
}

TEST_CASE("beta identity chain") {
    CHECK(beta_identity_check(1.0, 1.0, 0.5).residual < 1e-8);
    CHECK(beta_identity_check(2.0, 1.0, 0.5).residual < 1e-8);
    CHECK(beta_identity_check(3.0, 0.0, 0.3).residual == 0.0);
    CHECK(beta_identity_check(2.0, 1.0, 0.3).residual < 1e-8);
    CHECK_THROWS_AS(beta_identity_check(1.0, 2.0, 0.5), DomainError);
}

TEST_CASE("time grid validation") {
    CHECK_THROWS_AS((TimeGrid{{0.5, 0.5}}).validate(), GridError);
    CHECK_THROWS_AS((TimeGrid{{1.0, 0.5}}).validate(), GridError);
    CHECK_THROWS_AS((TimeGrid{{}}).validate(), GridError);
    CHECK((TimeGrid{{0.5, 1.0}}).find(1.0) == 1);
}

TEST_CASE("each sampler reproduces cov_r within 3 SE on a small batch") {
    const TimeGrid g{{0.5, 1.0, 2.0}};
    const auto target = cov_r_matrix(g.times);
    for (int rep = 0; rep < 4; ++rep) {
        const GaussianPathBatch b = rep == 0   ? sample_fbm_odd(g, 4000, 11)
                                    : rep == 1 ? sample_heat_origin(g, 4000, 12)
                                    : rep == 2 ? sample_volterra(g, 4000, 13, 256)
                                               : sample_cholesky_reference(g, 4000, 14);
        for (std::size_t p = 0; p < b.paths(); ++p) REQUIRE(b.samples(p, 0) == 0.0);
        CHECK(compare_covariance(b, target).max_abs_z < 4.0);
    }
}

TEST_CASE("self-similarity report at a = 1 is the identity") {
    const TimeGrid g{{0.5, 1.0}};
    const auto b = sample_cholesky_reference(g, 500, 3);
    const auto r = self_similarity_check(b, 1.0);
    CHECK(r.max_abs_z == 0.0);
    CHECK_THROWS_AS(self_similarity_check(b, 4.0), GridError);
}

TEST_CASE("samplers are reproducible and thread-count independent") {
    const TimeGrid g{{0.5, 1.0}};
    SamplerOptions one, four;
    four.threads = 4;
    const auto a = sample_fbm_odd(g, 300, 5, one);
    const auto b = sample_fbm_odd(g, 300, 5, four);
    CHECK(a.samples.data == b.samples.data);
}

#include "doctest.h"

#include "kinkflux/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace kinkflux;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    // Random123 kat_vectors: counter words (c0, c1, c2, c3) = (block lo, block hi, stream lo, stream hi)
    CHECK(Philox4x32::generate(0, 0, 0) == Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate(~0ull, ~0ull, ~0ull) ==
          Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate(0x299f31d0a4093822ull, 0x0370734413198a2eull, 0x85a308d3243f6a88ull) ==
          Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are pure functions of their identity") {
    RngStream a(42, 3), b(42, 3);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
    RngStream c(42, 4);
    RngStream d(42, 3);
    CHECK(c.next_u64() != d.next_u64());
    CHECK(RngStream(7).split(5).stream_id() == RngStream(7).split(5).stream_id());
    std::set<std::uint64_t> ids;
    for (std::uint64_t i = 0; i < 256; ++i) ids.insert(RngStream(7).split(i).stream_id());
    CHECK(ids.size() == 256);
}

TEST_CASE("uniforms stay in the open interval, normals have unit moments") {
    RngStream r(2024);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);

    const int n = 200000;
    std::vector<double> z(n);
    RngStream(99).fill_normal(z);
    double m1 = 0, m2 = 0, m4 = 0;
    for (double v : z) {
        m1 += v;
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
    CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("fill_normal scales by stddev") {
    std::vector<double> a(10), b(10);
    RngStream(5).fill_normal(a);
    RngStream(5).fill_normal(b, 3.0);
    for (int i = 0; i < 10; ++i) CHECK(b[i] == doctest::Approx(3.0 * a[i]));
}

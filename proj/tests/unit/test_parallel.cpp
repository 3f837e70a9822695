#include "doctest.h"

#include "kinkflux/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <vector>

using namespace kinkflux;

TEST_CASE("every index runs exactly once for any worker count") {
    for (std::size_t w : {1u, 3u, 8u}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), w, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) REQUIRE(h.load() == 1);
    }
}

TEST_CASE("exceptions propagate to the caller") {
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](std::size_t i) {
                                     if (i == 37) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

TEST_CASE("thread count resolution") {
    CHECK(resolve_threads(5) == 5);
    setenv("KINKFLUX_THREADS", "3", 1);
    CHECK(resolve_threads(0) == 3);
    unsetenv("KINKFLUX_THREADS");
    CHECK(resolve_threads(0) >= 1);
}

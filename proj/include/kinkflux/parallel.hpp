#pragma once

#include <cstddef>
#include <functional>

namespace kinkflux {

/// Worker count: explicit value if > 0, else KINKFLUX_THREADS, else hardware concurrency.
std::size_t resolve_threads(std::size_t requested = 0);

/// Runs body(i) for i in [0, n) on up to `threads` workers pulling indices from a shared counter.
///
/// Each index is processed exactly once; callers write into per-index slots, so the
/// result never depends on the worker count. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace kinkflux

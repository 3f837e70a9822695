#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace kinkflux {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// The 64-bit key is the seed; the 128-bit counter is (block, stream).
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block generate(std::uint64_t key, std::uint64_t stream, std::uint64_t block) noexcept;
};

/// Seeded, splittable random stream.
///
/// Each stream is identified by (seed, stream id) and walks a block counter, so a
/// stream is a pure function of its identity and how many values have been drawn.
/// `split(i)` derives an independent child stream, which is how ensembles give every
/// path its own substream regardless of which worker runs it.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    RngStream split(std::uint64_t index) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal (Box-Muller on two uniforms).
    double normal() noexcept;
    void fill_normal(std::span<double> out, double stddev = 1.0) noexcept;

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Block buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer, used to derive stream identifiers and config hashes.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace kinkflux

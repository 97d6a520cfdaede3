#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace adrl {

/// Counter-based random stream. Draw k of stream (seed, id) is a pure function
/// of (seed, id, k), so results do not depend on the platform's standard
/// library distributions.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }
    std::uint64_t draws() const noexcept { return counter_; }

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n). n must be > 0.
    std::size_t below(std::size_t n);
    /// Standard normal via Box-Muller (consumes two draws per variate).
    double normal();

    /// Fisher-Yates shuffle of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    /// Child stream with an id derived from this stream and `salt`.
    RngStream fork(std::uint64_t salt) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer; also used to derive per-repetition seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace adrl

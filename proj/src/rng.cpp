#include "adrl/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace adrl {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t key = mix64(seed_ ^ mix64(stream_ + 0x632be59bd9b4e019ULL));
    return mix64(key ^ mix64(counter_++));
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::below(std::size_t n) {
    // Rejection sampling keeps the result exactly uniform.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return static_cast<std::size_t>(r % bound);
}

double RngStream::normal() {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = below(i);
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

RngStream RngStream::fork(std::uint64_t salt) const {
    return RngStream(seed_, mix64(stream_ * 0x100000001b3ULL + salt + 1));
}

}  // namespace adrl

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace deepesn {

/// Counter-based pseudo-random stream.
///
/// The i-th output is a pure function of (key, i): a SplitMix64 finalizer
/// applied to key + i * golden_gamma. Child streams are obtained with
/// derive(), which hashes the parent key with a tag, so any component can be
/// given an independent stream without touching shared state.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept;

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    /// Uniform on the half-open interval (lo, hi]; returns lo when lo == hi.
    double uniform_left_open(double lo, double hi) noexcept { return hi - (hi - lo) * uniform01(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;

    RandomStream derive(std::uint64_t tag) const noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Order-sensitive combination of two 64-bit values.
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept;

/// Stable 64-bit FNV-1a hash of a string (std::hash is not stable across builds).
std::uint64_t hash_string(std::string_view s) noexcept;

/// Stable hash of a double's bit pattern.
std::uint64_t hash_double(double v) noexcept;

}  // namespace deepesn

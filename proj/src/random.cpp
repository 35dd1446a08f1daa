#include "deepesn/random.hpp"

#include <bit>

namespace deepesn {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t RandomStream::next_u64() noexcept
{
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
}

double RandomStream::uniform01() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::below(std::uint64_t bound) noexcept
{
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t r;
    do {
        r = next_u64();
    } while (r >= limit);
    return r % bound;
}

RandomStream RandomStream::derive(std::uint64_t tag) const noexcept
{
    return RandomStream(hash_combine(key_, tag));
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept
{
    return mix64(seed ^ mix64(value + kGoldenGamma + (seed << 6) + (seed >> 2)));
}

std::uint64_t hash_string(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_double(double v) noexcept
{
    if (v == 0.0) v = 0.0;  // fold -0 onto +0
    return mix64(std::bit_cast<std::uint64_t>(v));
}

}  // namespace deepesn

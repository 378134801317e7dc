#pragma once

#include <cstdint>
#include <random>

namespace owc {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based stream splitting: the seed for draw `index` of stream `stream`
/// depends only on (master, stream, index), never on evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept
{
    return mix64(mix64(master ^ mix64(stream)) + index);
}

// Named streams so independent consumers of one master seed never collide.
namespace stream {
inline constexpr std::uint64_t channel = 1;
inline constexpr std::uint64_t bits = 2;
inline constexpr std::uint64_t noise = 3;
inline constexpr std::uint64_t snr = 4;
inline constexpr std::uint64_t shuffle = 5;
inline constexpr std::uint64_t init = 6;
inline constexpr std::uint64_t split = 7;
inline constexpr std::uint64_t schedule = 8;
} // namespace stream

} // namespace owc

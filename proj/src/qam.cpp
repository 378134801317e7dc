#include "owc/qam.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace owc {
namespace {

const double kScale = std::sqrt(42.0);

constexpr unsigned gray_encode(unsigned i) { return i ^ (i >> 1); }

constexpr unsigned gray_decode(unsigned g)
{
    unsigned i = g;
    for (unsigned s = g >> 1; s != 0; s >>= 1)
        i ^= s;
    return i;
}

double level(unsigned gray) { return 7.0 - 2.0 * static_cast<double>(gray_decode(gray)); }

// Returns the Gray word of the nearest level to v (v in units of the unscaled grid).
unsigned decide(double v)
{
    double u = (7.0 - v) / 2.0; // continuous binary index
    if (u <= 0.0)
        return gray_encode(0);
    if (u >= 7.0)
        return gray_encode(7);
    const double lo = std::floor(u);
    const auto i_lo = static_cast<unsigned>(lo);
    const double d_lo = std::abs(v - (7.0 - 2.0 * lo));
    const double d_hi = std::abs(v - (7.0 - 2.0 * (lo + 1.0)));
    if (d_lo < d_hi)
        return gray_encode(i_lo);
    if (d_hi < d_lo)
        return gray_encode(i_lo + 1);
    return std::min(gray_encode(i_lo), gray_encode(i_lo + 1));
}

} // namespace

CVec map_qam64(std::span<const std::uint8_t> bits)
{
    if (bits.size() % kBitsPerQam64 != 0)
        throw std::invalid_argument("map_qam64: bit count must be a multiple of 6");
    CVec out(bits.size() / kBitsPerQam64);
    for (size_t s = 0; s < out.size(); ++s) {
        const auto* b = bits.data() + s * kBitsPerQam64;
        const unsigned gi = (b[0] & 1u) << 2 | (b[1] & 1u) << 1 | (b[2] & 1u);
        const unsigned gq = (b[3] & 1u) << 2 | (b[4] & 1u) << 1 | (b[5] & 1u);
        out[s] = cd(level(gi), level(gq)) / kScale;
    }
    return out;
}

Bits demap_qam64(std::span<const cd> symbols)
{
    Bits out(symbols.size() * kBitsPerQam64);
    for (size_t s = 0; s < symbols.size(); ++s) {
        const unsigned gi = decide(symbols[s].real() * kScale);
        const unsigned gq = decide(symbols[s].imag() * kScale);
        auto* b = out.data() + s * kBitsPerQam64;
        b[0] = (gi >> 2) & 1u;
        b[1] = (gi >> 1) & 1u;
        b[2] = gi & 1u;
        b[3] = (gq >> 2) & 1u;
        b[4] = (gq >> 1) & 1u;
        b[5] = gq & 1u;
    }
    return out;
}

} // namespace owc

#pragma once

#include "owc/dft.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace owc {

using Bits = std::vector<std::uint8_t>;

// Square Gray-coded 64-QAM with unit average energy. The first three bits of a
// codeword select the in-phase level, the last three the quadrature level;
// per axis, Gray word g maps to amplitude (7 - 2 * gray_decode(g)) / sqrt(42),
// so 000000 is the corner point (+7 + 7j) / sqrt(42).

inline constexpr int kBitsPerQam64 = 6;

CVec map_qam64(std::span<const std::uint8_t> bits);

/// Nearest-point hard decision. A sample exactly on a decision boundary goes
/// to the neighbour with the smaller Gray word.
Bits demap_qam64(std::span<const cd> symbols);

} // namespace owc

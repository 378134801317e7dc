#pragma once

#include <complex>
#include <span>
#include <vector>

namespace owc {

using cd = std::complex<double>;
using CVec = std::vector<cd>;

/// Forward DFT, X_k = sum_n x_n e^{-j2πkn/N} (unnormalized).
CVec fft(std::span<const cd> x);

/// Inverse DFT, x_n = (1/N) sum_k X_k e^{+j2πkn/N}.
CVec ifft(std::span<const cd> x);

/// Overwrite entries above N/2 with the conjugate mirror of the lower half, so
/// the vector is the spectrum of a real sequence wherever the lower half is.
inline void conj_mirror_upper(std::span<cd> h)
{
    const std::size_t n = h.size();
    for (std::size_t k = n / 2 + 1; k < n; ++k)
        h[k] = std::conj(h[n - k]);
}

} // namespace owc

#pragma once

// DCO-OFDM slot framing: QAM data and pilot placement, Hermitian mirroring,
// IDFT + cyclic prefix + DC bias at the transmitter, and the inverse chain at
// the receiver.

#include "owc/channel.hpp"
#include "owc/qam.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace owc {

struct ModemConfig {
    int n_f = 324;
    int n_s = 14;
    int l_cp = 7;
    int l_s = 5;
    std::vector<int> pilot_symbols{3, 6, 9, 12}; // 1-based symbol numbers
    double bias_sigma = 3.0;

    void validate() const;

    int half() const { return n_f / 2; }
    /// Data tones per data symbol (1 .. n_f/2 - 1).
    int data_tones() const { return n_f / 2 - 1; }
    /// 0-based indices of the symbols that carry data.
    std::vector<int> data_symbols() const;
    int bits_per_slot() const;
    int samples_per_slot() const { return n_s * (n_f + l_cp); }
};

struct PilotPattern {
    std::vector<int> tone_indices;   // first-half tones, strictly increasing
    std::vector<int> symbol_indices; // 0-based
    CVec pilot_values;               // one per tone

    static PilotPattern make(const ModemConfig& cfg);

    int n_tones() const { return static_cast<int>(tone_indices.size()); }
    int n_symbols() const { return static_cast<int>(symbol_indices.size()); }
};

/// n_f x n_s complex slot, stored symbol-major (one contiguous column per symbol).
class ResourceGrid {
public:
    ResourceGrid() = default;
    ResourceGrid(int n_f, int n_s) : n_f_(n_f), n_s_(n_s), data_(static_cast<size_t>(n_f * n_s)) {}

    int n_f() const { return n_f_; }
    int n_s() const { return n_s_; }

    cd& at(int k, int s) { return data_[static_cast<size_t>(s * n_f_ + k)]; }
    const cd& at(int k, int s) const { return data_[static_cast<size_t>(s * n_f_ + k)]; }

    std::span<cd> column(int s) { return {data_.data() + s * n_f_, static_cast<size_t>(n_f_)}; }
    std::span<const cd> column(int s) const
    {
        return {data_.data() + s * n_f_, static_cast<size_t>(n_f_)};
    }
    std::span<const cd> entries() const { return data_; }

    /// Fill tones above n_f/2 with the conjugate mirror and zero DC and Nyquist.
    void mirror_hermitian();
    /// Largest |X(k,s) - conj X(n_f-k,s)| plus the DC/Nyquist magnitudes,
    /// relative to the largest entry magnitude.
    double hermitian_error() const;

private:
    int n_f_ = 0;
    int n_s_ = 0;
    CVec data_;
};

/// Real transmit or receive sample stream with the DC bias the transmitter added.
struct Waveform {
    std::vector<double> samples;
    double bias = 0.0;
};

ResourceGrid assemble_slot(std::span<const std::uint8_t> data_bits, const PilotPattern& pattern,
                           const ModemConfig& cfg);

Waveform modulate(const ResourceGrid& grid, const ModemConfig& cfg);

/// Causal linear convolution with the first l_cp + 1 channel taps plus white
/// real Gaussian noise.
Waveform apply_channel(const Waveform& signal, const ChannelRealization& ch, double noise_std,
                       std::uint64_t seed, const ModemConfig& cfg);

/// Time-domain noise standard deviation for an electrical SNR measured at the
/// DFT output over the occupied first-half entries of `grid`:
/// mean |H_k X_k|^2 / E|W_k|^2 = 10^(snr_db / 10).
double noise_std_for_snr(const ResourceGrid& grid, std::span<const cd> response, double snr_db,
                         const ModemConfig& cfg);

/// Per-tone noise variance E|W_k|^2 produced by time-domain noise_std.
double tone_noise_variance(double noise_std, const ModemConfig& cfg);

ResourceGrid demodulate(const Waveform& signal, const ModemConfig& cfg);

/// One-tap equalization of every data tone followed by hard 64-QAM demapping.
Bits equalize_and_decode(const ResourceGrid& received, std::span<const cd> h_est,
                         const PilotPattern& pattern, const ModemConfig& cfg);

/// Uniform random bits for one slot.
Bits random_bits(int count, std::uint64_t seed);

/// One full slot through the link: random bits, framing, modulation, channel,
/// noise and demodulation. Bits and noise draw from independent streams of
/// `seed`. snr_db = +inf gives a noiseless link.
struct SlotRun {
    Bits bits;
    ResourceGrid tx;
    ResourceGrid rx;
    CVec true_h;          // slot_response of the realization
    double noise_std = 0.0;
    double tone_var = 0.0; // per-tone noise variance at the DFT output
};

SlotRun run_slot(const ChannelRealization& ch, const PilotPattern& pattern, const ModemConfig& cfg,
                 double snr_db, std::uint64_t seed);

} // namespace owc

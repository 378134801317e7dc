#pragma once

// Pilot-based classical estimators: least squares, linear MMSE with ensemble
// correlations, interpolated LS, and the single-gain flat estimate.

#include "owc/channel.hpp"
#include "owc/modem.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <vector>

namespace owc {

/// LS observations at the pilot positions, n_tones x n_symbols, row-major.
struct PilotLs {
    int n_tones = 0;
    int n_symbols = 0;
    CVec values;

    PilotLs() = default;
    PilotLs(int tones, int symbols)
        : n_tones(tones), n_symbols(symbols), values(static_cast<size_t>(tones * symbols))
    {
    }
    cd& at(int p, int s) { return values[static_cast<size_t>(p * n_symbols + s)]; }
    const cd& at(int p, int s) const { return values[static_cast<size_t>(p * n_symbols + s)]; }

    /// Mean across pilot symbols.
    CVec symbol_average() const;
};

struct CorrelationSet {
    Eigen::MatrixXcd r_hhp;  // n_f x n_p
    Eigen::MatrixXcd r_hphp; // n_p x n_p
    std::size_t sample_count = 0;
};

/// Y_p / X_p per pilot symbol.
PilotLs ls_pilot_grid(const ResourceGrid& received, const PilotPattern& pattern);

/// Y_p / X_p averaged over the pilot symbols (one value per pilot tone).
CVec ls_estimate(const ResourceGrid& received, const PilotPattern& pattern);

/// Noise variance of ls_estimate entries for per-tone noise variance tone_var.
double ls_noise_variance(double tone_var, const PilotPattern& pattern);

CorrelationSet estimate_correlations(std::span<const CVec> responses, const PilotPattern& pattern);

/// Correlations of slot_response over a realization corpus.
CorrelationSet estimate_correlations(std::span<const ChannelRealization> corpus,
                                     const PilotPattern& pattern, int n_f, int l_cp);

/// Binary persistence (named-tensor container, magic "OWCC"), single precision.
void save_correlations(const CorrelationSet& corr, const std::filesystem::path& path);
CorrelationSet load_correlations(const std::filesystem::path& path);

/// R_HHp (R_HpHp + noise_var I)^-1 h_ls through an LDLT solve.
///
/// The filter is strictly linear in h_ls, and tones above n_f/2 of a real
/// channel are conjugates of the lower half, which no strictly linear map of
/// h_ls can track. With real_channel set only the lower half is kept and the
/// upper half is its conjugate mirror.
CVec mmse_estimate(std::span<const cd> h_ls, const CorrelationSet& corr, double noise_var,
                   bool real_channel = true);

/// Linear interpolation over the first-half tones, nearest-value extrapolation
/// at the band edges, conjugate mirroring above n_f / 2.
CVec ls_interpolate(std::span<const cd> h_ls, const PilotPattern& pattern, int n_f);

/// Mean of Y_p / X_p over every pilot: a single flat channel gain.
cd direct_detection_gain(const ResourceGrid& received, const PilotPattern& pattern);

} // namespace owc

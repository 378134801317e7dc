#include "owc/modem.hpp"

#include "owc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace owc {

void ModemConfig::validate() const
{
    if (n_f < 4 || n_f % 2 != 0)
        throw std::invalid_argument("n_f must be even and >= 4");
    if (n_s < 1)
        throw std::invalid_argument("n_s must be >= 1");
    if (l_cp < 0 || l_cp >= n_f)
        throw std::invalid_argument("l_cp must lie in [0, n_f)");
    if (l_s < 1)
        throw std::invalid_argument("pilot spacing must be >= 1");
    if (pilot_symbols.empty())
        throw std::invalid_argument("at least one pilot symbol is required");
    for (size_t i = 0; i < pilot_symbols.size(); ++i) {
        if (pilot_symbols[i] < 1 || pilot_symbols[i] > n_s)
            throw std::invalid_argument("pilot symbol numbers must lie in [1, n_s]");
        if (i > 0 && pilot_symbols[i] <= pilot_symbols[i - 1])
            throw std::invalid_argument("pilot symbol numbers must be strictly increasing");
    }
    if (!(bias_sigma > 0.0))
        throw std::invalid_argument("bias_sigma must be positive");
}

std::vector<int> ModemConfig::data_symbols() const
{
    std::vector<int> out;
    for (int s = 0; s < n_s; ++s)
        if (std::find(pilot_symbols.begin(), pilot_symbols.end(), s + 1) == pilot_symbols.end())
            out.push_back(s);
    return out;
}

int ModemConfig::bits_per_slot() const
{
    return static_cast<int>(data_symbols().size()) * data_tones() * kBitsPerQam64;
}

PilotPattern PilotPattern::make(const ModemConfig& cfg)
{
    cfg.validate();
    PilotPattern p;
    for (int k = 1; k <= cfg.half() - 1; k += cfg.l_s)
        p.tone_indices.push_back(k);
    for (int s : cfg.pilot_symbols)
        p.symbol_indices.push_back(s - 1);
    // Unit-modulus chirp (odd-length Zadoff-Chu, root 1). Unit energy matches
    // the data tones; a constant pilot on an evenly spaced comb would instead
    // concentrate the symbol into peaks well past the DC bias and clip.
    const int m_len = static_cast<int>(p.tone_indices.size());
    for (int m = 0; m < m_len; ++m) {
        const double phase = -std::numbers::pi * m * (m + (m_len % 2)) / m_len;
        p.pilot_values.push_back(std::polar(1.0, phase));
    }
    return p;
}

void ResourceGrid::mirror_hermitian()
{
    const int half = n_f_ / 2;
    for (int s = 0; s < n_s_; ++s) {
        at(0, s) = 0.0;
        at(half, s) = 0.0;
        for (int k = 1; k < half; ++k)
            at(n_f_ - k, s) = std::conj(at(k, s));
    }
}

double ResourceGrid::hermitian_error() const
{
    double peak = 0.0;
    double err = 0.0;
    const int half = n_f_ / 2;
    for (int s = 0; s < n_s_; ++s) {
        err = std::max({err, std::abs(at(0, s)), std::abs(at(half, s))});
        for (int k = 1; k < n_f_; ++k) {
            peak = std::max(peak, std::abs(at(k, s)));
            err = std::max(err, std::abs(at(k, s) - std::conj(at(n_f_ - k, s))));
        }
    }
    return peak > 0.0 ? err / peak : err;
}

ResourceGrid assemble_slot(std::span<const std::uint8_t> data_bits, const PilotPattern& pattern,
                           const ModemConfig& cfg)
{
    cfg.validate();
    if (static_cast<int>(data_bits.size()) != cfg.bits_per_slot())
        throw std::invalid_argument("assemble_slot: expected " +
                                    std::to_string(cfg.bits_per_slot()) + " data bits, got " +
                                    std::to_string(data_bits.size()));
    ResourceGrid grid(cfg.n_f, cfg.n_s);
    const CVec symbols = map_qam64(data_bits);
    size_t next = 0;
    for (int s : cfg.data_symbols())
        for (int k = 1; k <= cfg.data_tones(); ++k)
            grid.at(k, s) = symbols[next++];
    for (int s : pattern.symbol_indices)
        for (size_t p = 0; p < pattern.tone_indices.size(); ++p)
            grid.at(pattern.tone_indices[p], s) = pattern.pilot_values[p];
    grid.mirror_hermitian();
    return grid;
}

Waveform modulate(const ResourceGrid& grid, const ModemConfig& cfg)
{
    if (grid.n_f() != cfg.n_f || grid.n_s() != cfg.n_s)
        throw std::invalid_argument("modulate: grid shape does not match the modem");
    if (grid.hermitian_error() > 1e-12)
        throw std::invalid_argument("modulate: grid is not Hermitian symmetric");

    const int sym_len = cfg.n_f + cfg.l_cp;
    Waveform out;
    out.samples.resize(static_cast<size_t>(cfg.samples_per_slot()));
    for (int s = 0; s < cfg.n_s; ++s) {
        const CVec t = ifft(grid.column(s));
        double* dst = out.samples.data() + s * sym_len;
        for (int i = 0; i < cfg.l_cp; ++i)
            dst[i] = t[static_cast<size_t>(cfg.n_f - cfg.l_cp + i)].real();
        for (int i = 0; i < cfg.n_f; ++i)
            dst[cfg.l_cp + i] = t[static_cast<size_t>(i)].real();
    }

    double mean = 0.0;
    for (double v : out.samples)
        mean += v;
    mean /= static_cast<double>(out.samples.size());
    double var = 0.0;
    for (double v : out.samples)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(out.samples.size());

    out.bias = cfg.bias_sigma * std::sqrt(var);
    for (double& v : out.samples)
        v = std::max(0.0, v + out.bias);
    return out;
}

Waveform apply_channel(const Waveform& signal, const ChannelRealization& ch, double noise_std,
                       std::uint64_t seed, const ModemConfig& cfg)
{
    if (noise_std < 0.0)
        throw std::invalid_argument("apply_channel: noise_std must be non-negative");
    const CVec taps_c = impulse_taps(ch, cfg.n_f, cfg.l_cp + 1);
    std::vector<double> taps(taps_c.size());
    for (size_t i = 0; i < taps.size(); ++i)
        taps[i] = taps_c[i].real();

    Waveform out;
    out.bias = signal.bias;
    const auto& x = signal.samples;
    out.samples.assign(x.size(), 0.0);
    for (size_t n = 0; n < x.size(); ++n) {
        double acc = 0.0;
        const size_t kmax = std::min(taps.size() - 1, n);
        for (size_t k = 0; k <= kmax; ++k)
            acc += taps[k] * x[n - k];
        out.samples[n] = acc;
    }
    if (noise_std > 0.0) {
        Rng rng(seed);
        std::normal_distribution<double> noise(0.0, noise_std);
        for (double& v : out.samples)
            v += noise(rng);
    }
    return out;
}

double tone_noise_variance(double noise_std, const ModemConfig& cfg)
{
    return static_cast<double>(cfg.n_f) * noise_std * noise_std;
}

double noise_std_for_snr(const ResourceGrid& grid, std::span<const cd> response, double snr_db,
                         const ModemConfig& cfg)
{
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("noise_std_for_snr: SNR must be finite");
    if (static_cast<int>(response.size()) != cfg.n_f)
        throw std::invalid_argument("noise_std_for_snr: response length must equal n_f");
    double energy = 0.0;
    long used = 0;
    for (int s = 0; s < grid.n_s(); ++s)
        for (int k = 1; k < cfg.half(); ++k) {
            const cd x = grid.at(k, s);
            if (x != cd(0.0, 0.0)) {
                energy += std::norm(response[static_cast<size_t>(k)] * x);
                ++used;
            }
        }
    if (used == 0 || !(energy > 0.0))
        throw std::invalid_argument("noise_std_for_snr: received signal energy is zero");
    const double es = energy / static_cast<double>(used);
    const double snr = std::pow(10.0, snr_db / 10.0);
    return std::sqrt(es / (snr * static_cast<double>(cfg.n_f)));
}

ResourceGrid demodulate(const Waveform& signal, const ModemConfig& cfg)
{
    if (static_cast<int>(signal.samples.size()) != cfg.samples_per_slot())
        throw std::invalid_argument("demodulate: expected " +
                                    std::to_string(cfg.samples_per_slot()) + " samples, got " +
                                    std::to_string(signal.samples.size()));
    ResourceGrid grid(cfg.n_f, cfg.n_s);
    const int sym_len = cfg.n_f + cfg.l_cp;
    CVec body(static_cast<size_t>(cfg.n_f));
    for (int s = 0; s < cfg.n_s; ++s) {
        const double* src = signal.samples.data() + s * sym_len + cfg.l_cp;
        for (int i = 0; i < cfg.n_f; ++i)
            body[static_cast<size_t>(i)] = src[i] - signal.bias;
        const CVec y = fft(body);
        std::copy(y.begin(), y.end(), grid.column(s).begin());
    }
    return grid;
}

Bits equalize_and_decode(const ResourceGrid& received, std::span<const cd> h_est,
                         const PilotPattern& pattern, const ModemConfig& cfg)
{
    (void)pattern; // data positions follow from cfg; pilots occupy whole symbols
    if (static_cast<int>(h_est.size()) != cfg.n_f)
        throw std::invalid_argument("equalize_and_decode: estimate length must equal n_f");
    for (int k = 1; k <= cfg.data_tones(); ++k)
        if (h_est[static_cast<size_t>(k)] == cd(0.0, 0.0))
            throw std::domain_error("equalize_and_decode: zero channel estimate on data tone " +
                                    std::to_string(k));
    const auto data_syms = cfg.data_symbols();
    CVec eq;
    eq.reserve(data_syms.size() * static_cast<size_t>(cfg.data_tones()));
    for (int s : data_syms)
        for (int k = 1; k <= cfg.data_tones(); ++k)
            eq.push_back(received.at(k, s) / h_est[static_cast<size_t>(k)]);
    return demap_qam64(eq);
}

Bits random_bits(int count, std::uint64_t seed)
{
    Rng rng(seed);
    Bits b(static_cast<size_t>(count));
    std::uint64_t word = 0;
    for (int i = 0; i < count; ++i) {
        if (i % 64 == 0)
            word = rng();
        b[static_cast<size_t>(i)] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return b;
}

SlotRun run_slot(const ChannelRealization& ch, const PilotPattern& pattern, const ModemConfig& cfg,
                 double snr_db, std::uint64_t seed)
{
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("run_slot: SNR must be a number or +inf");
    SlotRun r;
    r.bits = random_bits(cfg.bits_per_slot(), derive_seed(seed, stream::bits));
    r.tx = assemble_slot(r.bits, pattern, cfg);
    r.true_h = slot_response(ch, cfg.n_f, cfg.l_cp);
    if (std::isfinite(snr_db))
        r.noise_std = noise_std_for_snr(r.tx, r.true_h, snr_db, cfg);
    r.tone_var = tone_noise_variance(r.noise_std, cfg);
    const Waveform sent = modulate(r.tx, cfg);
    const Waveform got = apply_channel(sent, ch, r.noise_std, derive_seed(seed, stream::noise), cfg);
    r.rx = demodulate(got, cfg);
    return r;
}

} // namespace owc

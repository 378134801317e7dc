#pragma once

// Indoor optical wireless channel: Lambertian LOS gain, image-method specular
// reflections, and the sampled two-path response seen by a DCO-OFDM slot.

#include "owc/dft.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace owc {

inline constexpr double kSpeedOfLight = 299792458.0;

using Vec3 = std::array<double, 3>;

struct ScenarioConfig {
    Vec3 room_dims{5.0, 5.0, 5.0};       // m
    Vec3 tx_position{2.5, 2.5, 5.0};     // m, ceiling centre
    Vec3 tx_orientation{0.0, 0.0, -1.0}; // boresight straight down
    std::array<double, 2> rx_height_range{0.5, 1.5};    // m
    double reflection_coeff = 0.7;                      // alpha
    double tx_semiangle_deg = 45.0;                     // Phi_1/2
    double rx_fov_deg = 45.0;                           // phi_1/2
    std::array<double, 2> rx_elevation_range{0.0, 30.0}; // deg, tilt off vertical
    std::array<double, 2> rx_rotation_range{0.0, 360.0}; // deg, azimuth
    double detector_area = 1e-4;                        // m^2
    double sample_rate = 200e6;                         // Hz
    int n_paths = 2;                                    // M, LOS included
    // Electrical scale (optical power x responsivity) applied to every path
    // gain of a sampled realization. Calibrated so the stock delay-spread
    // templates split the Table-I ensemble into three populated classes.
    double link_gain = 80.0;

    void validate() const;
};

struct Pose {
    Vec3 position{};
    Vec3 orientation{0.0, 0.0, 1.0}; // unit vector

    void validate(const ScenarioConfig& cfg) const;
};

struct NlosPath {
    double gain = 0.0;  // >= 0
    double delay = 0.0; // samples, fractional
    bool operator==(const NlosPath&) const = default;
};

struct ChannelRealization {
    double h_los = 0.0;
    std::vector<NlosPath> nlos_paths;
    bool operator==(const ChannelRealization&) const = default;
};

enum class DelayClass : std::uint8_t { LDS = 0, MDS = 1, HDS = 2 };

std::string_view to_string(DelayClass c);
std::optional<DelayClass> parse_delay_class(std::string_view s);

/// Tail-tap magnitude thresholds (taps 1.., LOS tap excluded).
struct PdpTemplate {
    std::vector<double> tail_thresholds;
    double los_reference = 0.0;

    void validate() const;
    PdpTemplate scaled(double factor) const;

    static PdpTemplate default_lds();
    static PdpTemplate default_hds();
};

/// Both templates valid, equal length within the cyclic prefix, and every HDS
/// tail threshold strictly above the LDS one.
void validate_template_pair(const PdpTemplate& lds, const PdpTemplate& hds, int l_cp);

enum class Wall : std::uint8_t { XMin, XMax, YMin, YMax, Ceiling };
inline constexpr std::array<Wall, 5> kAllWalls{Wall::XMin, Wall::XMax, Wall::YMin, Wall::YMax,
                                               Wall::Ceiling};

struct SpecularPath {
    double gain = 0.0;  // unitless
    double delay = 0.0; // seconds of excess delay over the LOS path
};

double lambertian_order(double phi_half_deg);

double los_gain(const Pose& tx, const Pose& rx, const ScenarioConfig& cfg);

SpecularPath specular_path(const Pose& tx, const Pose& rx, Wall wall, const ScenarioConfig& cfg);

ChannelRealization sample_realization(const ScenarioConfig& cfg, std::uint64_t seed);

/// Sampled frequency response of a real channel over n_f tones.
///
/// For 0 <= k <= n_f/2 the fractional-delay exponential
/// H_k = h_los + sum_m g_m exp(-j 2 pi k tau_m / n_f) is used; the Nyquist tone
/// keeps its real part and tones above n_f/2 are the conjugate mirror, so the
/// tap response is real. For integer delays this equals the exponential over
/// every k.
CVec frequency_response(const ChannelRealization& ch, int n_f);

/// First n_taps entries of the length-n_f inverse DFT of frequency_response.
CVec impulse_taps(const ChannelRealization& ch, int n_f, int n_taps);

/// Response experienced by one OFDM slot: DFT of the first l_cp + 1 taps,
/// i.e. exactly the FIR applied by the modem's channel stage.
CVec slot_response(const ChannelRealization& ch, int n_f, int l_cp);

/// Hard three-region delay-spread decision on tail magnitudes.
/// LDS if every tail tap is strictly below lds, else MDS if every tail tap is
/// strictly below hds, else HDS.
DelayClass classify_tail(std::span<const double> tail_magnitudes, const PdpTemplate& lds,
                         const PdpTemplate& hds);

/// Delay-spread label of a tap vector (taps[0] is the LOS tap).
DelayClass label_class(std::span<const cd> taps, const PdpTemplate& lds, const PdpTemplate& hds);

} // namespace owc

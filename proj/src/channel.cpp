#include "owc/channel.hpp"

#include "owc/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace owc {
namespace {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Lambertian emitter -> detector gain, zero outside the receiver FOV or behind the emitter.
double lambertian_link(const Pose& src, const Pose& rx, double k, const ScenarioConfig& cfg,
                       double* distance)
{
    const Vec3 v = sub(rx.position, src.position);
    const double d = norm(v);
    if (d <= 0.0)
        throw std::invalid_argument("degenerate geometry: transmitter and receiver coincide");
    if (distance)
        *distance = d;
    const double cos_emit = dot(src.orientation, v) / d;
    const double cos_inc = -dot(rx.orientation, v) / d;
    if (cos_emit <= 0.0 || cos_inc < 0.0)
        return 0.0;
    const double incidence = std::acos(std::min(cos_inc, 1.0));
    if (incidence > deg2rad(cfg.rx_fov_deg))
        return 0.0;
    return cfg.detector_area * (k + 1.0) * std::pow(cos_emit, k) * cos_inc /
           (2.0 * std::numbers::pi * d * d);
}

Pose mirror(const Pose& p, Wall wall, const Vec3& room)
{
    Pose img = p;
    int axis = 0;
    double plane = 0.0;
    switch (wall) {
    case Wall::XMin: axis = 0; plane = 0.0; break;
    case Wall::XMax: axis = 0; plane = room[0]; break;
    case Wall::YMin: axis = 1; plane = 0.0; break;
    case Wall::YMax: axis = 1; plane = room[1]; break;
    case Wall::Ceiling: axis = 2; plane = room[2]; break;
    }
    img.position[axis] = 2.0 * plane - p.position[axis];
    img.orientation[axis] = -p.orientation[axis];
    return img;
}

} // namespace

void ScenarioConfig::validate() const
{
    for (double d : room_dims)
        if (!(d > 0.0))
            throw std::invalid_argument("room dimensions must be positive");
    auto open_angle = [](double a) { return a > 0.0 && a < 90.0; };
    if (!open_angle(tx_semiangle_deg) || !open_angle(rx_fov_deg))
        throw std::invalid_argument("semi-angles must lie in (0, 90) degrees");
    if (!(reflection_coeff > 0.0 && reflection_coeff <= 1.0))
        throw std::invalid_argument("reflection coefficient must lie in (0, 1]");
    if (!(detector_area > 0.0))
        throw std::invalid_argument("detector area must be positive");
    if (!(sample_rate > 0.0))
        throw std::invalid_argument("sample rate must be positive");
    if (n_paths < 1)
        throw std::invalid_argument("n_paths must be >= 1");
    if (!(link_gain > 0.0))
        throw std::invalid_argument("link_gain must be positive");
    if (rx_height_range[0] > rx_height_range[1] || rx_height_range[0] < 0.0 ||
        rx_height_range[1] > room_dims[2])
        throw std::invalid_argument("receiver height range must lie inside the room");
    if (rx_elevation_range[0] > rx_elevation_range[1] ||
        rx_rotation_range[0] > rx_rotation_range[1])
        throw std::invalid_argument("angle ranges must be ordered");
    Pose{tx_position, tx_orientation}.validate(*this);
}

void Pose::validate(const ScenarioConfig& cfg) const
{
    if (std::abs(norm(orientation) - 1.0) > 1e-12)
        throw std::invalid_argument("pose orientation must be a unit vector");
    for (int i = 0; i < 3; ++i)
        if (position[i] < 0.0 || position[i] > cfg.room_dims[i])
            throw std::invalid_argument("pose position lies outside the room");
}

std::string_view to_string(DelayClass c)
{
    switch (c) {
    case DelayClass::LDS: return "LDS";
    case DelayClass::MDS: return "MDS";
    case DelayClass::HDS: return "HDS";
    }
    return "?";
}

std::optional<DelayClass> parse_delay_class(std::string_view s)
{
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "lds")
        return DelayClass::LDS;
    if (lower == "mds")
        return DelayClass::MDS;
    if (lower == "hds")
        return DelayClass::HDS;
    return std::nullopt;
}

void PdpTemplate::validate() const
{
    if (tail_thresholds.empty())
        throw std::invalid_argument("template needs at least one tail threshold");
    for (size_t i = 0; i < tail_thresholds.size(); ++i) {
        if (!(tail_thresholds[i] > 0.0))
            throw std::invalid_argument("template thresholds must be strictly positive");
        if (i > 0 && tail_thresholds[i] > tail_thresholds[i - 1])
            throw std::invalid_argument("template thresholds must be non-increasing");
    }
}

PdpTemplate PdpTemplate::scaled(double factor) const
{
    PdpTemplate t = *this;
    for (auto& v : t.tail_thresholds)
        v *= factor;
    t.los_reference *= factor;
    return t;
}

void validate_template_pair(const PdpTemplate& lds, const PdpTemplate& hds, int l_cp)
{
    lds.validate();
    hds.validate();
    if (lds.tail_thresholds.size() != hds.tail_thresholds.size())
        throw std::invalid_argument("LDS and HDS templates differ in length");
    for (size_t i = 0; i < lds.tail_thresholds.size(); ++i)
        if (!(hds.tail_thresholds[i] > lds.tail_thresholds[i]))
            throw std::invalid_argument("template precondition violated: HDS tail tap " +
                                        std::to_string(i + 1) + " is not above the LDS tail tap");
    if (static_cast<int>(lds.tail_thresholds.size()) > l_cp)
        throw std::invalid_argument("templates extend beyond the cyclic prefix");
}

PdpTemplate PdpTemplate::default_lds()
{
    return {{0.21930e-4, 0.09676e-4, 0.06175e-4, 0.04517e-4}, 6.4e-4};
}

PdpTemplate PdpTemplate::default_hds()
{
    return {{0.30126e-4, 0.13441e-4, 0.08609e-4, 0.06310e-4}, 5.5e-4};
}

double lambertian_order(double phi_half_deg)
{
    if (!(phi_half_deg > 0.0 && phi_half_deg < 90.0))
        throw std::domain_error("semi-angle must lie in (0, 90) degrees");
    return -std::log(2.0) / std::log(std::cos(deg2rad(phi_half_deg)));
}

double los_gain(const Pose& tx, const Pose& rx, const ScenarioConfig& cfg)
{
    const double k = lambertian_order(cfg.tx_semiangle_deg);
    return lambertian_link(tx, rx, k, cfg, nullptr);
}

SpecularPath specular_path(const Pose& tx, const Pose& rx, Wall wall, const ScenarioConfig& cfg)
{
    const double k = lambertian_order(cfg.tx_semiangle_deg);
    const double d_los = norm(sub(rx.position, tx.position));
    if (d_los <= 0.0)
        throw std::invalid_argument("degenerate geometry: transmitter and receiver coincide");
    const Pose image = mirror(tx, wall, cfg.room_dims);
    double d_img = 0.0;
    const double g = cfg.reflection_coeff * lambertian_link(image, rx, k, cfg, &d_img);
    return {g, std::max(0.0, d_img - d_los) / kSpeedOfLight};
}

ChannelRealization sample_realization(const ScenarioConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    Rng rng(seed);
    std::uniform_real_distribution<double> ux(0.0, cfg.room_dims[0]);
    std::uniform_real_distribution<double> uy(0.0, cfg.room_dims[1]);
    std::uniform_real_distribution<double> uz(cfg.rx_height_range[0], cfg.rx_height_range[1]);
    std::uniform_real_distribution<double> uel(cfg.rx_elevation_range[0],
                                               cfg.rx_elevation_range[1]);
    std::uniform_real_distribution<double> uaz(cfg.rx_rotation_range[0], cfg.rx_rotation_range[1]);

    const Pose tx{cfg.tx_position, cfg.tx_orientation};
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Pose rx;
        rx.position = {ux(rng), uy(rng), uz(rng)};
        const double el = deg2rad(uel(rng));
        const double az = deg2rad(uaz(rng));
        rx.orientation = {std::sin(el) * std::cos(az), std::sin(el) * std::sin(az), std::cos(el)};

        const double g_los = los_gain(tx, rx, cfg);
        if (g_los <= 0.0)
            continue;

        ChannelRealization ch;
        ch.h_los = cfg.link_gain * g_los;
        std::vector<NlosPath> candidates;
        for (Wall w : kAllWalls) {
            const SpecularPath p = specular_path(tx, rx, w, cfg);
            if (p.gain > 0.0)
                candidates.push_back({cfg.link_gain * p.gain, p.delay * cfg.sample_rate});
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const NlosPath& a, const NlosPath& b) { return a.gain > b.gain; });
        const size_t keep = std::min(candidates.size(), static_cast<size_t>(cfg.n_paths - 1));
        ch.nlos_paths.assign(candidates.begin(), candidates.begin() + static_cast<long>(keep));
        return ch;
    }
    throw std::runtime_error("sample_realization: no receiver pose with a visible LOS path after " +
                             std::to_string(kMaxAttempts) + " attempts");
}

CVec frequency_response(const ChannelRealization& ch, int n_f)
{
    if (n_f < 2 || n_f % 2 != 0)
        throw std::invalid_argument("frequency_response: n_f must be even and >= 2");
    const int half = n_f / 2;
    CVec h(static_cast<size_t>(n_f));
    for (int k = 0; k <= half; ++k) {
        cd v = ch.h_los;
        for (const auto& p : ch.nlos_paths)
            v += p.gain * std::polar(1.0, -2.0 * std::numbers::pi * k * p.delay / n_f);
        h[static_cast<size_t>(k)] = v;
    }
    h[static_cast<size_t>(half)] = h[static_cast<size_t>(half)].real();
    for (int k = half + 1; k < n_f; ++k)
        h[static_cast<size_t>(k)] = std::conj(h[static_cast<size_t>(n_f - k)]);
    return h;
}

CVec impulse_taps(const ChannelRealization& ch, int n_f, int n_taps)
{
    if (n_taps < 0 || n_taps > n_f)
        throw std::invalid_argument("impulse_taps: n_taps must lie in [0, n_f]");
    CVec taps = ifft(frequency_response(ch, n_f));
    taps.resize(static_cast<size_t>(n_taps));
    return taps;
}

CVec slot_response(const ChannelRealization& ch, int n_f, int l_cp)
{
    if (l_cp < 0 || l_cp >= n_f)
        throw std::invalid_argument("slot_response: l_cp must lie in [0, n_f)");
    const CVec taps = impulse_taps(ch, n_f, l_cp + 1);
    CVec padded(static_cast<size_t>(n_f));
    for (size_t i = 0; i < taps.size(); ++i)
        padded[i] = taps[i].real();
    return fft(padded);
}

DelayClass classify_tail(std::span<const double> tail_magnitudes, const PdpTemplate& lds,
                         const PdpTemplate& hds)
{
    const size_t n = lds.tail_thresholds.size();
    if (hds.tail_thresholds.size() != n)
        throw std::invalid_argument("LDS and HDS templates differ in length");
    if (tail_magnitudes.size() < n)
        throw std::invalid_argument("too few tail magnitudes for the templates");
    auto all_below = [&](const PdpTemplate& t) {
        for (size_t i = 0; i < n; ++i)
            if (!(tail_magnitudes[i] < t.tail_thresholds[i]))
                return false;
        return true;
    };
    if (all_below(lds))
        return DelayClass::LDS;
    if (all_below(hds))
        return DelayClass::MDS;
    return DelayClass::HDS;
}

DelayClass label_class(std::span<const cd> taps, const PdpTemplate& lds, const PdpTemplate& hds)
{
    const size_t n = lds.tail_thresholds.size();
    if (taps.size() < n + 1)
        throw std::invalid_argument("label_class: need the LOS tap plus one tap per threshold");
    std::vector<double> tail(n);
    for (size_t i = 0; i < n; ++i)
        tail[i] = std::abs(taps[i + 1]);
    return classify_tail(tail, lds, hds);
}

} // namespace owc

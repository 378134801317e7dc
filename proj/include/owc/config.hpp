#pragma once

// Simulation configuration: one flat JSON object whose keys mirror the
// physical parameter names (room_x, alpha, tx_semiangle_deg, n_f, lr0, ...).
// Missing keys keep the built-in defaults; unknown keys are errors. Delay-spread
// templates are arrays [los_reference, tail_1, ..., tail_n].
//
//   { "room_x": 5, "alpha": 0.7, "link_gain": 80, "n_f": 324,
//     "lds_template": [6.4e-4, 2.193e-5, 9.676e-6, 6.175e-6, 4.517e-6] }

#include "owc/channel.hpp"
#include "owc/modem.hpp"
#include "owc/nn.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace owc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    ScenarioConfig scenario;
    ModemConfig modem;
    PdpTemplate lds = PdpTemplate::default_lds();
    PdpTemplate hds = PdpTemplate::default_hds();
    nn::TrainConfig train;

    /// Validates every section and the template ordering hds > lds per tail tap.
    void validate() const;
};

SimConfig parse_config(const std::string& json_text);
SimConfig load_config(const std::filesystem::path& path);
std::string dump_config(const SimConfig& cfg);

} // namespace owc

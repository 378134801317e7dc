#include "owc/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace owc {

using nlohmann::json;

void SimConfig::validate() const
{
    try {
        scenario.validate();
        modem.validate();
        validate_template_pair(lds, hds, modem.l_cp);
        train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
}

namespace {

// Flat key table: each entry binds one JSON key to a field of SimConfig.
template <typename F>
void for_each_key(SimConfig& c, F&& f)
{
    auto& sc = c.scenario;
    auto& m = c.modem;
    auto& t = c.train;
    f("room_x", sc.room_dims[0]);
    f("room_y", sc.room_dims[1]);
    f("room_z", sc.room_dims[2]);
    f("tx_x", sc.tx_position[0]);
    f("tx_y", sc.tx_position[1]);
    f("tx_z", sc.tx_position[2]);
    f("tx_orientation", sc.tx_orientation);
    f("rx_height_min", sc.rx_height_range[0]);
    f("rx_height_max", sc.rx_height_range[1]);
    f("alpha", sc.reflection_coeff);
    f("tx_semiangle_deg", sc.tx_semiangle_deg);
    f("rx_fov_deg", sc.rx_fov_deg);
    f("rx_elevation_min_deg", sc.rx_elevation_range[0]);
    f("rx_elevation_max_deg", sc.rx_elevation_range[1]);
    f("rx_rotation_min_deg", sc.rx_rotation_range[0]);
    f("rx_rotation_max_deg", sc.rx_rotation_range[1]);
    f("detector_area", sc.detector_area);
    f("sample_rate", sc.sample_rate);
    f("n_paths", sc.n_paths);
    f("link_gain", sc.link_gain);
    f("n_f", m.n_f);
    f("n_s", m.n_s);
    f("l_cp", m.l_cp);
    f("l_s", m.l_s);
    f("pilot_symbols", m.pilot_symbols);
    f("bias_sigma", m.bias_sigma);
    f("lr0", t.lr0);
    f("lr_decay", t.lr_decay);
    f("decay_every", t.decay_every);
    f("epochs", t.epochs);
    f("batch", t.batch);
    f("l2", t.l2);
    f("beta1", t.beta1);
    f("beta2", t.beta2);
    f("eps", t.eps);
}

// Templates are written as [los_reference, tail_1, ..., tail_n].
PdpTemplate template_from(const json& j, const char* key)
{
    std::vector<double> v;
    try {
        v = j.get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
    if (v.size() < 2)
        throw ConfigError(std::string("config key '") + key +
                          "' needs a LOS reference and at least one tail threshold");
    return {std::vector<double>(v.begin() + 1, v.end()), v.front()};
}

json template_to(const PdpTemplate& t)
{
    std::vector<double> v{t.los_reference};
    v.insert(v.end(), t.tail_thresholds.begin(), t.tail_thresholds.end());
    return v;
}

} // namespace

SimConfig parse_config(const std::string& json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw ConfigError("config must be a JSON object");

    SimConfig cfg;
    std::set<std::string> known{"lds_template", "hds_template"};
    for_each_key(cfg, [&](const char* key, auto& field) {
        known.insert(key);
        auto it = root.find(key);
        if (it == root.end())
            return;
        try {
            it->get_to(field);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    });
    for (auto it = root.begin(); it != root.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown config key '" + it.key() + "'");
    if (auto it = root.find("lds_template"); it != root.end())
        cfg.lds = template_from(*it, "lds_template");
    if (auto it = root.find("hds_template"); it != root.end())
        cfg.hds = template_from(*it, "hds_template");
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const SimConfig& cfg)
{
    SimConfig copy = cfg;
    json j = json::object();
    for_each_key(copy, [&](const char* key, auto& field) { j[key] = field; });
    j["lds_template"] = template_to(cfg.lds);
    j["hds_template"] = template_to(cfg.hds);
    return j.dump(2) + "\n";
}

} // namespace owc

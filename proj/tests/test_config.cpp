#include "owc/config.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace owc;

TEST_CASE("empty object gives the built-in defaults")
{
    const SimConfig c = parse_config("{}");
    CHECK(c.scenario.room_dims == Vec3{5.0, 5.0, 5.0});
    CHECK(c.scenario.reflection_coeff == 0.7);
    CHECK(c.scenario.tx_semiangle_deg == 45.0);
    CHECK(c.scenario.rx_fov_deg == 45.0);
    CHECK(c.scenario.detector_area == 1e-4);
    CHECK(c.scenario.n_paths == 2);
    CHECK(c.modem.n_f == 324);
    CHECK(c.modem.n_s == 14);
    CHECK(c.modem.l_cp == 7);
    CHECK(c.modem.pilot_symbols == std::vector<int>{3, 6, 9, 12});
    CHECK(c.train.lr0 == 2e-4);
    CHECK(c.train.lr_decay == 0.3);
    CHECK(c.train.decay_every == 10);
    CHECK(c.train.epochs == 100);
    CHECK(c.train.batch == 64);
    CHECK(c.train.l2 == 1e-9);
    CHECK(c.lds.tail_thresholds == PdpTemplate::default_lds().tail_thresholds);
    CHECK(c.hds.los_reference == 5.5e-4);
}

TEST_CASE("keys override their fields")
{
    const SimConfig c = parse_config(R"({
        "room_x": 6, "alpha": 0.5, "rx_fov_deg": 60, "n_paths": 3, "link_gain": 40,
        "pilot_symbols": [2, 5, 8, 11], "epochs": 20, "batch": 32,
        "lds_template": [6e-4, 2e-5, 1e-5], "hds_template": [5e-4, 3e-5, 2e-5]
    })");
    CHECK(c.scenario.room_dims[0] == 6.0);
    CHECK(c.scenario.reflection_coeff == 0.5);
    CHECK(c.scenario.rx_fov_deg == 60.0);
    CHECK(c.scenario.n_paths == 3);
    CHECK(c.scenario.link_gain == 40.0);
    CHECK(c.modem.pilot_symbols == std::vector<int>{2, 5, 8, 11});
    CHECK(c.train.epochs == 20);
    CHECK(c.train.batch == 32);
    CHECK(c.lds.los_reference == 6e-4);
    CHECK(c.lds.tail_thresholds == std::vector<double>{2e-5, 1e-5});
    CHECK(c.hds.tail_thresholds == std::vector<double>{3e-5, 2e-5});
}

TEST_CASE("dump and parse roundtrip")
{
    SimConfig c;
    c.scenario.rx_height_range = {0.6, 1.2};
    c.modem.bias_sigma = 3.5;
    c.train.l2 = 1e-8;
    const SimConfig back = parse_config(dump_config(c));
    CHECK(dump_config(back) == dump_config(c));
    CHECK(back.scenario.rx_height_range == c.scenario.rx_height_range);
    CHECK(back.modem.bias_sigma == 3.5);
}

TEST_CASE("rejected configurations")
{
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"room_width": 5})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"alpha": "high"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"alpha": 1.5})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"n_f": 323})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"batch": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"lds_template": [6e-4]})"), ConfigError);
    // HDS tails must exceed LDS tails.
    CHECK_THROWS_AS(parse_config(R"({"lds_template": [6e-4, 3e-5, 2e-5], "hds_template": [5e-4, 2e-5, 1e-5]})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/owc.json"), ConfigError);
}

TEST_CASE("file loading")
{
    testing::TempDir dir;
    std::ofstream(dir / "c.json") << R"({"tx_semiangle_deg": 60, "snr_unused": 1})";
    CHECK_THROWS_AS(load_config(dir / "c.json"), ConfigError);
    std::ofstream(dir / "d.json") << R"({"tx_semiangle_deg": 60})";
    CHECK(load_config(dir / "d.json").scenario.tx_semiangle_deg == 60.0);
}

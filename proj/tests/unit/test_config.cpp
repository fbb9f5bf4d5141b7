#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "hapq/config.hpp"

namespace {

using namespace hapq;
using nlohmann::json;

std::string message_of(const json& j) {
    try {
        parse_config_json(j);
    } catch (const config_error& e) {
        return e.what();
    }
    return "";
}

TEST(Config, EmptyObjectGivesBaseline) {
    const auto c = parse_config_json(json::object());
    const auto& p = c.phys;
    EXPECT_EQ(p.wavelength_nm, 1550.0);
    EXPECT_EQ(p.cn2_ground, 9.6e-14);
    EXPECT_EQ(p.wind_speed, 10.0);
    EXPECT_EQ(p.theta_pe, 1e-6);
    EXPECT_EQ(p.tracking_eff, 0.8);
    EXPECT_EQ(p.obstruction_ratio, 0.3);
    EXPECT_EQ(p.n_ao, 6);
    EXPECT_EQ(p.n_max, 150);
    EXPECT_EQ(p.K_I, 1.0);
    EXPECT_EQ(p.ao_integration_s, 1e-3);
    EXPECT_EQ(p.ao_delay_s, 2e-3);
    EXPECT_EQ(p.d_rx_ground, 0.4);
    EXPECT_EQ(p.d_rx_balloon, 0.3);
    EXPECT_EQ(p.w0_balloon, 0.1);
    EXPECT_EQ(p.w0_ground, 0.2);
    EXPECT_EQ(p.balloon_alt_m, 35e3);
    EXPECT_EQ(p.ground_alt_m, 20.0);
    EXPECT_EQ(p.source_rate_hz, 80e6);
    EXPECT_EQ(p.mu, 0.01);
    EXPECT_EQ(p.qber_x, 0.04);
    EXPECT_EQ(p.p_det_ground, 0.85);
    EXPECT_EQ(p.p_det_balloon, 0.25);
    EXPECT_EQ(p.fiber_loss_db_per_km, 0.18);
    EXPECT_FALSE(p.p_bsm.has_value());
    EXPECT_EQ(c.protocol, protocol_kind::bb84_trusted);
}

TEST(Config, RangeErrorsNameKeyAndRange) {
    const auto m = message_of({{"theta_pe", -1}});
    EXPECT_NE(m.find("theta_pe"), std::string::npos);
    EXPECT_NE(m.find("range"), std::string::npos);
    EXPECT_NE(message_of({{"mu", 0}}).find("mu"), std::string::npos);
    EXPECT_NE(message_of({{"n_ao", 2.5}}).find("n_ao"), std::string::npos);
    EXPECT_NE(message_of({{"n_ao", 200}, {"n_max", 100}}).find("n_max"), std::string::npos);
    EXPECT_NE(message_of({{"qber_x", 0.5}}).find("qber_x"), std::string::npos);
}

TEST(Config, UnknownKeysRejected) {
    EXPECT_NE(message_of({{"unknown_key", 1}}).find("unknown_key"), std::string::npos);
    EXPECT_FALSE(message_of({{"network", {{"nodes", json::array()}, {"extra", 1}}}}).empty());
    EXPECT_FALSE(message_of({{"sweep", {{"parameter", "not_a_key"}}}}).empty());
    EXPECT_FALSE(message_of({{"protocol", "bb85"}}).empty());
}

TEST(Config, Topologies) {
    auto c = parse_config_json({{"protocol", "entanglement"}, {"topology", "middle-balloon"}, {"d_cities_km", 100}});
    ASSERT_EQ(c.network.nodes.size(), 3u);
    EXPECT_EQ(c.network.node("balloon").position_km, 50.0);
    EXPECT_EQ(c.route_a.front(), "balloon");
    c = parse_config_json({{"protocol", "mdi"}, {"topology", "middle-fiber"}});
    EXPECT_EQ(c.route_a.back(), "middle");
    EXPECT_FALSE(message_of({{"topology", "ring"}}).empty());
    EXPECT_FALSE(message_of({{"topology", "middle-fiber"}, {"network", {{"nodes", json::array()}}}}).empty());
}

TEST(Config, RouteChecks) {
    const json net = {{"nodes", {{{"id", "s"}, {"kind", "balloon"}}, {{"id", "a"}}, {{"id", "b"}, {"position_km", 10}}}},
                      {"links", {{{"from", "s"}, {"to", "a"}}, {{"from", "s"}, {"to", "b"}}}}};
    EXPECT_NO_THROW(parse_config_json({{"protocol", "entanglement"}, {"network", net}, {"route_a", {"s", "a"}},
                                       {"route_b", {"s", "b"}}}));
    EXPECT_FALSE(message_of({{"protocol", "entanglement"}, {"network", net}, {"route_a", {"s", "a"}},
                             {"route_b", {"b", "s"}}})
                     .empty());
    EXPECT_FALSE(message_of({{"protocol", "entanglement"}, {"network", net}}).empty());
    EXPECT_FALSE(message_of({{"network", net}, {"route", {"a", "b"}}}).empty());
    const auto c = parse_config_json({{"network", net}, {"balloon_alt_m", 25000}});
    EXPECT_EQ(c.network.node("s").altitude_m, 25000.0);
    EXPECT_EQ(c.network.node("a").altitude_m, 20.0);
}

TEST(Config, TransmittanceResolution) {
    EXPECT_EQ((*make_transmittance(parse_config_json(json::object())))(10, 20, 35000), 1.0);
    EXPECT_EQ((*make_transmittance(parse_config_json({{"transmittance", 0.9}})))(45, 20, 35000), 0.9);
    EXPECT_FALSE(message_of({{"transmittance", 1.5}}).empty());

    const auto dir = std::filesystem::temp_directory_path() / "hapq_env_dir";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "flat.csv");
        f << "zenith_deg,ground_alt_m,platform_alt_m,transmittance\n0,0,40000,0.6\n";
    }
    const auto cfg = parse_config_json({{"transmittance", "flat.csv"}}, "/nonexistent");
    EXPECT_THROW(make_transmittance(cfg), config_error);
    setenv(transmittance_dir_env, dir.c_str(), 1);
    EXPECT_EQ((*make_transmittance(cfg))(0, 0, 40000), 0.6);
    unsetenv(transmittance_dir_env);
}

TEST(Config, FileParsing) {
    const auto c = parse_config(std::string(HAPQ_SOURCE_DIR) + "/configs/italy_trusted_a.json");
    EXPECT_EQ(c.network.nodes.size(), 5u);
    EXPECT_EQ(c.route.size(), 5u);
    EXPECT_THROW(parse_config("/nonexistent.json"), config_error);
    const auto bad = std::filesystem::temp_directory_path() / "hapq_bad.json";
    std::ofstream(bad) << "{ not json";
    EXPECT_THROW(parse_config(bad.string()), parse_error);
}

TEST(Config, HashIsStable) {
    const json a = {{"mu", 0.02}, {"seed", 3}};
    const json b = json::parse(R"({"seed": 3, "mu": 0.02})");
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash({{"mu", 0.03}, {"seed", 3}}));
}

}  // namespace

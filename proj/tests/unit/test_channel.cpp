#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hapq/channel.hpp"

namespace {

using namespace hapq;

const constant_transmittance unity(1.0);

link_params fig3_params(double D) {
    link_params lp;
    lp.waist = 0.1;
    lp.aperture.diameter = D;
    lp.pointing = {2e-6, 0.85};
    lp.cells = 1024;
    return lp;
}

const double deg = pi / 180.0;

TEST(Downlink, Fig3SettingFiniteAndOrdered) {
    const auto g = make_slant_geometry(20.0, 20e3, 70.0 * deg);
    double prev = 0.0;
    for (double D : {0.3, 0.4, 0.5}) {
        const auto ch = build_downlink(g, fig3_params(D), unity);
        EXPECT_GT(ch.mean_efficiency, 0.0);
        EXPECT_LT(ch.mean_efficiency, 1.0);
        EXPECT_GT(ch.collection.mean(), prev) << D;
        prev = ch.collection.mean();
    }
}

TEST(Downlink, SmallerApertureWinsAtAltitude) {
    link_params lp;
    lp.cells = 1024;
    const auto g = make_slant_geometry(20.0, 35e3, 0.0);
    lp.aperture.diameter = 0.4;
    const double m4 = build_downlink(g, lp, unity).mean_efficiency;
    lp.aperture.diameter = 0.6;
    const double m6 = build_downlink(g, lp, unity).mean_efficiency;
    EXPECT_GT(m4, m6);
}

TEST(Downlink, CalmLimitCollapses) {
    link_params lp;
    lp.profile = calm_profile();
    lp.pointing = {0.0, 1.0};
    const auto g = make_slant_geometry(20.0, 35e3, 0.3);
    const auto ch = build_downlink(g, lp, unity);
    const auto beam = gaussian_beam_params(lp.wavelength, lp.waist, g.slant_range);
    const double geo = weibull_params(lp.aperture.diameter / 2.0, beam.radius).eta0;
    EXPECT_TRUE(ch.collection.is_point_mass());
    EXPECT_TRUE(ch.coupling.is_point_mass());
    EXPECT_NEAR(ch.mean_efficiency, geo * eta0_max(lp.aperture) * lp.p_det, 1e-12);
    EXPECT_TRUE(ch.validity.all_pass());
}

TEST(Downlink, ZenithInsensitiveNearVertical) {
    link_params lp;
    lp.cells = 1024;
    for (double H : {20e3, 35e3}) {
        const double a = build_downlink(make_slant_geometry(20.0, H, 0.0), lp, unity).mean_efficiency;
        const double b = build_downlink(make_slant_geometry(20.0, H, 10.0 * deg), lp, unity).mean_efficiency;
        EXPECT_LT(std::abs(a - b) / a, 0.10) << H;
    }
}

TEST(Downlink, MeanComposition) {
    link_params lp;
    const auto ch = build_downlink(make_slant_geometry(20.0, 35e3, 0.0), lp, constant_transmittance(0.8));
    EXPECT_NEAR(ch.mean_efficiency, 0.8 * ch.collection.mean() * ch.coupling.mean() * 0.85, 1e-15);
    EXPECT_NEAR(ch.coupling.mean() / (ch.eta0_coupling * eta_chi(ch.stats.log_amp) * ch.mean_eta_phi), 1.0, 0.10);
}

TEST(Uplink, Anisoplanatism) {
    link_params lp;
    lp.waist = 0.2;
    lp.aperture.diameter = 0.3;
    lp.cells = 1024;
    const auto g = make_slant_geometry(20.0, 35e3, 0.0);
    lp.pointing.pointing_error = 0.0;
    const auto up0 = build_uplink(g, lp, unity);
    EXPECT_EQ(up0.eta_aniso, 1.0);
    const auto down = build_downlink(g, lp, unity);
    EXPECT_NEAR(up0.mean_efficiency, down.mean_efficiency, 1e-15);

    lp.pointing.pointing_error = 1e-6;
    const auto up1 = build_uplink(g, lp, unity);
    lp.pointing.pointing_error = up1.stats.isoplanatic;
    const auto up2 = build_uplink(g, lp, unity);
    EXPECT_NEAR(up2.eta_aniso, std::exp(-1.0), 1e-12);
}

TEST(Horizontal, ShortPathLimit) {
    link_params lp;
    lp.aperture.diameter = 0.3;
    const auto ch = build_horizontal(25e3, 10.0, lp, unity);
    // W(z) = W0 at this range, so capture is 1 - exp(-2 r^2 / W0^2)
    EXPECT_NEAR(ch.collection.mean(), -std::expm1(-2.0 * 0.15 * 0.15 / (lp.waist * lp.waist)), 1e-3);
    EXPECT_GT(ch.collection.mean(), 0.98);
    const double expect =
        ch.collection.mean() * ch.eta0_coupling * eta_chi(ch.stats.log_amp) * ch.mean_eta_phi * lp.p_det;
    EXPECT_NEAR(ch.mean_efficiency, expect, 1e-12);
}

TEST(Horizontal, HeightInsensitive) {
    link_params lp;
    lp.aperture.diameter = 0.3;
    const double a = build_horizontal(20e3, 100e3, lp, unity).mean_efficiency;
    const double b = build_horizontal(30e3, 100e3, lp, unity).mean_efficiency;
    EXPECT_LT(std::abs(a - b) / std::max(a, b), 0.15);
}

TEST(Horizontal, WaistTradeOff) {
    link_params lp;
    lp.aperture.diameter = 0.3;
    for (double z : {80e3, 120e3, 189.5e3}) {
        lp.waist = 0.05;
        const double small = build_horizontal(25e3, z, lp, unity).mean_efficiency;
        lp.waist = 0.15;
        const double large = build_horizontal(25e3, z, lp, unity).mean_efficiency;
        EXPECT_GT(large, small) << z;
    }
}

TEST(Horizontal, EarthBlocked) {
    EXPECT_THROW(build_horizontal(18e3, 1500e3, link_params{}, unity), invalid_geometry);
}

TEST(Fiber, Transmissivity) {
    EXPECT_EQ(fiber_transmissivity(0.0), 1.0);
    EXPECT_NEAR(fiber_transmissivity(50.0), 0.1259, 1e-4);
    EXPECT_THROW(fiber_transmissivity(-1.0), config_error);
    EXPECT_NEAR(build_fiber(50.0, 1.0).mean_efficiency, std::pow(10.0, -0.9), 1e-15);
    EXPECT_THROW(build_fiber(1.0, 1.2), config_error);
}

TEST(SampleTransmission, Extremes) {
    const auto lossless = build_fiber(0.0, 1.0);
    EXPECT_TRUE(sample_transmission(lossless, 0.3, 0.7, 0.999999));
    auto opaque = build_fiber(0.0, 1.0);
    opaque.eta_atm = 0.0;
    EXPECT_FALSE(sample_transmission(opaque, 0.3, 0.7, 0.0));
}

TEST(SampleTransmission, EmpiricalRate) {
    link_params lp;
    lp.cells = 1024;
    const auto ch = build_downlink(make_slant_geometry(20.0, 35e3, 0.0), lp, unity);
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u;
    int hits = 0;
    const int N = 45'000;
    for (int i = 0; i < N; ++i) hits += sample_transmission(ch, u(g), u(g), u(g));
    EXPECT_NEAR(static_cast<double>(hits) / N, ch.mean_efficiency, 0.01);
}

TEST(Validity, WanderAndCalm) {
    link_params lp;
    lp.aperture.diameter = 0.4;
    lp.pointing = {50e-6, 0.0};
    const auto g = make_slant_geometry(20.0, 35e3, std::acos(35e3 / 60e3));
    const auto ch = build_downlink(g, lp, unity);
    EXPECT_FALSE(ch.validity.small_wander.pass);
    EXPECT_FALSE(ch.warnings.empty());
}

}  // namespace

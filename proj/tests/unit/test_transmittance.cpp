#include <sstream>

#include <gtest/gtest.h>

#include "hapq/transmittance.hpp"

namespace {

using namespace hapq;

transmittance_table parse(const std::string& text) {
    std::istringstream in(text);
    return parse_table(in);
}

const char* header = "zenith_deg,ground_alt_m,platform_alt_m,transmittance\n";

TEST(TransmittanceTable, ParsesRows) {
    const auto t = parse(std::string("# lambda_nm=1310\n") + header + "0,20,35000,0.9\n30,20,35000,0.85\n60,20,35000,0.8\n");
    EXPECT_EQ(t.rows().size(), 3u);
    EXPECT_NEAR(t.wavelength(), 1310e-9, 1e-18);
}

TEST(TransmittanceTable, GridPointsAndInterpolation) {
    const auto t = parse(std::string(header) + "0,20,35000,0.90\n60,20,35000,0.80\n");
    EXPECT_DOUBLE_EQ(t(0.0, 20.0, 35000.0), 0.90);
    EXPECT_DOUBLE_EQ(t(60.0, 20.0, 35000.0), 0.80);
    EXPECT_NEAR(t(30.0, 20.0, 35000.0), 0.85, 1e-15);
    EXPECT_TRUE(t.hull_warning(30.0, 20.0, 35000.0).empty());
}

TEST(TransmittanceTable, TrilinearOnTensorGrid) {
    std::string text = header;
    // f = 0.9 - 0.001 z - 1e-6 h0 + 1e-6 H is linear, so trilinear is exact
    for (double z : {0.0, 40.0, 80.0})
        for (double h : {0.0, 1000.0})
            for (double H : {20000.0, 40000.0}) {
                const double v = 0.9 - 0.001 * z - 1e-6 * h + 1e-6 * (H - 40000.0);
                text += std::to_string(z) + "," + std::to_string(h) + "," + std::to_string(H) + "," +
                        std::to_string(v) + "\n";
            }
    const auto t = parse(text);
    EXPECT_NEAR(t(55.0, 300.0, 31000.0), 0.9 - 0.055 - 3e-4 - 9e-3, 1e-9);
}

TEST(TransmittanceTable, ClampsOutsideHull) {
    const auto t = parse(std::string(header) + "0,20,35000,0.90\n60,20,35000,0.80\n");
    EXPECT_DOUBLE_EQ(t(75.0, 20.0, 35000.0), 0.80);
    EXPECT_FALSE(t.hull_warning(75.0, 20.0, 35000.0).empty());
}

TEST(TransmittanceTable, Errors) {
    EXPECT_THROW(parse(std::string(header) + "0,20,35000,1.2\n"), invariant_violation);
    EXPECT_THROW(parse(""), parse_error);
    EXPECT_THROW(parse(header), parse_error);
    EXPECT_THROW(parse("a,b,c,d\n0,0,1,0.5\n"), parse_error);
    try {
        parse(std::string(header) + "0,20,35000,0.9\n10,20,oops,0.8\n");
        FAIL();
    } catch (const parse_error& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    // missing grid corner
    EXPECT_THROW(parse(std::string(header) + "0,0,1,0.9\n0,1,1,0.8\n10,0,1,0.7\n"), invariant_violation);
    EXPECT_THROW(load_table("/nonexistent/table.csv"), parse_error);
}

TEST(ConstantTransmittance, Values) {
    EXPECT_EQ(constant_transmittance(1.0)(12.0, 0.0, 1.0), 1.0);
    EXPECT_EQ(constant_transmittance(0.0)(12.0, 0.0, 1.0), 0.0);
    EXPECT_EQ((*constant_provider(0.9))(45.0, 20.0, 35000.0), 0.9);
    EXPECT_THROW(constant_transmittance(1.5), config_error);
}

TEST(ShippedFixture, LoadsAndIsCalibrated) {
    const auto t = load_table(std::string(HAPQ_SOURCE_DIR) + "/configs/transmittance_italy.csv");
    EXPECT_NEAR(t(0.0, 20.0, 35000.0), 0.7934, 1e-4);
    EXPECT_LT(t(70.0, 20.0, 35000.0), t(0.0, 20.0, 35000.0));
}

}  // namespace

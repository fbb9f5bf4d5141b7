#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/hypergeometric_pFq.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "hapq/coupling.hpp"

namespace {

using namespace hapq;

TEST(Eta0, ClosedForm) {
    EXPECT_NEAR(eta0_max({0.4, 0.0, 1.12}), 0.8145, 1e-3);
    EXPECT_NEAR(eta0_max({0.4, 0.0, 1e-6}), 0.0, 1e-9);
    EXPECT_LT(eta0_max({0.4, 0.3, 1.12}), eta0_max({0.4, 0.0, 1.12}));
    EXPECT_THROW(eta0_max({0.4, 1.0, 1.12}), config_error);
    EXPECT_THROW(eta0_max({0.4, 0.3, 0.0}), config_error);
}

TEST(EtaChi, Identities) {
    EXPECT_EQ(eta_chi(0.0), 1.0);
    EXPECT_NEAR(eta_chi(1.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(eta_chi(std::log1p(0.3)), 1.0 / 1.3, 1e-15);
}

// Per-mode variances of a circular pupil from the residual-error table
// Delta_J (piston removed), normalized by (D/r0)^{5/3}.
TEST(Zernike, CircularPupilTable) {
    const double delta[] = {1.0299, 0.582, 0.134, 0.111, 0.0880, 0.0648, 0.0587, 0.0525, 0.0463, 0.0401,
                            0.0377, 0.0352, 0.0328, 0.0304, 0.0279, 0.0267, 0.0255, 0.0243, 0.0232, 0.0220, 0.0208};
    auto D = [&](int j) { return delta[j - 1]; };
    for (int n = 1; n <= 5; ++n) {
        const int first = n * (n + 1) / 2;       // Delta index before the order
        const int last = (n + 1) * (n + 2) / 2;  // Delta index after it
        const double per_mode = (D(first) - D(last)) / (n + 1);
        // the table carries three significant digits
        const double tol = n <= 3 ? 0.015 : 0.03;
        EXPECT_NEAR(zernike_variance(n, 1.0, 1.0, 0.0) / per_mode, 1.0, tol) << "n=" << n;
    }
    EXPECT_NEAR(zernike_variance(1, 1.0, 1.0, 0.0), 0.448, 0.01 * 0.448);
}

// Closed form for the circular pupil with the unrounded constant
// 0.0072 pi^{8/3} Gamma(14/3) / Gamma(17/6)^2.
TEST(Zernike, CircularPupilClosedForm) {
    double first_ratio = 0.0;
    for (int n = 1; n <= 30; ++n) {
        const double nn = n;
        const double exact = 0.0072 * std::pow(pi, 8.0 / 3.0) * (nn + 1) * std::tgamma(14.0 / 3.0) *
                             std::exp(std::lgamma(nn - 5.0 / 6.0) - std::lgamma(nn + 23.0 / 6.0)) /
                             std::pow(std::tgamma(17.0 / 6.0), 2);
        const double ratio = zernike_variance(n, 1.0, 1.0, 0.0) / exact;
        EXPECT_NEAR(ratio, 1.0, 0.01) << n;
        if (n == 1) first_ratio = ratio;
        EXPECT_NEAR(ratio, first_ratio, 1e-12) << n;
    }
}

TEST(Zernike, ScalingAndLimits) {
    for (int n : {1, 4, 20})
        EXPECT_NEAR(zernike_variance(n, 0.8, 0.1, 0.3) / zernike_variance(n, 0.4, 0.1, 0.3), std::pow(2.0, 5.0 / 3.0),
                    1e-12);
    EXPECT_EQ(zernike_variance(3, 0.4, infinity, 0.3), 0.0);
    EXPECT_THROW(zernike_variance(0, 0.4, 0.1, 0.3), config_error);
}

TEST(Zernike, AnnularHypergeometricOracle) {
    using mp = boost::multiprecision::cpp_bin_float_50;
    const mp pi_mp = boost::math::constants::pi<mp>();
    for (double alpha : {0.3, 0.5}) {
        for (int n : {1, 2, 5, 12}) {
            const mp a = alpha, nn = n;
            const mp a2 = a * a;
            const mp pref = mp("0.023") * (nn + 1) * tgamma(nn - mp(5) / 6) / tgamma(mp(17) / 6) *
                            pow(pi_mp, mp(8) / 3) / (pow(mp(2), mp(5) / 3) * (1 - a2) * (1 - pow(a, 2 * (nn + 1))));
            const mp first = (1 + pow(a, 2 * nn + mp(17) / 3)) * tgamma(mp(14) / 3) /
                             (tgamma(mp(17) / 6) * tgamma(nn + mp(23) / 6));
            const mp f = boost::math::hypergeometric_pFq({nn - mp(5) / 6, mp(-11) / 6}, {nn + 2}, a2);
            const mp second = 2 * pow(a, 2 * (nn + 1)) / tgamma(nn + 2) * f;
            const double oracle = (pref * (first - second)).convert_to<double>();
            EXPECT_NEAR(zernike_variance(n, 1.0, 1.0, alpha) / oracle, 1.0, 1e-10) << alpha << " " << n;
        }
    }
}

TEST(Zernike, ObstructionRaisesLowOrders) {
    EXPECT_GT(zernike_variance(1, 1.0, 1.0, 0.3), zernike_variance(1, 1.0, 1.0, 0.0));
    EXPECT_GT(zernike_variance(2, 1.0, 1.0, 0.5), zernike_variance(2, 1.0, 1.0, 0.3));
}

// gamma_n^2 from the definition, integrated to infinity.
double gamma2_oracle(double T, double tau, double K, int n, double D, double v) {
    const double nc = 0.3 * (n + 1) * v / D;
    auto eps2 = [&](double nu) {
        const std::complex<double> s(0.0, 2.0 * pi * nu);
        const std::complex<double> G = K * std::exp(-tau * s) * (1.0 - std::exp(-T * s)) / (T * T * s * s);
        return std::norm(1.0 / (1.0 + G));
    };
    auto psd = [&](double nu) {
        if (nu > nc) return (n == 1 ? std::pow(nc, -2.0 / 3.0) : 1.0) * std::pow(nu / nc, -17.0 / 3.0);
        return n == 1 ? std::pow(nu, -2.0 / 3.0) : 1.0;
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    auto low_num = ts.integrate([&](double nu) { return psd(nu) * eps2(nu); }, 0.0, nc);
    auto low_den = ts.integrate([&](double nu) { return psd(nu); }, 0.0, nc);
    // tail split into decades so the oscillating rejection is resolved
    double hi_num = 0.0, hi_den = 0.0, a = nc;
    for (int i = 0; i < 40; ++i) {
        const double b = a * 2.0;
        hi_num += ts.integrate([&](double nu) { return psd(nu) * eps2(nu); }, a, b);
        a = b;
    }
    hi_num += es.integrate([&](double nu) { return psd(nu) * eps2(nu); }, a, std::numeric_limits<double>::infinity());
    hi_den = es.integrate([&](double nu) { return psd(nu); }, nc, std::numeric_limits<double>::infinity());
    return (low_num + hi_num) / (low_den + hi_den);
}

TEST(AoAttenuation, MatchesDefinition) {
    ao_config ao;
    for (int n = 1; n <= 6; ++n) {
        const double o = gamma2_oracle(1e-3, 2e-3, 1.0, n, 0.4, 10.0);
        EXPECT_NEAR(ao_attenuation(ao, n, 0.4, 10.0) / o, 1.0, 1e-3) << n;
    }
}

TEST(AoAttenuation, Limits) {
    ao_config ao;
    EXPECT_EQ(ao_attenuation(ao, 7, 0.4, 10.0), 1.0);
    ao.gain = 0.0;
    EXPECT_EQ(ao_attenuation(ao, 3, 0.4, 10.0), 1.0);
    ao.gain = 1.0;
    ao.integration_time = 1e-7;
    ao.delay = 2e-7;
    for (int n = 1; n <= 6; ++n) EXPECT_LT(ao_attenuation(ao, n, 0.4, 10.0), 1e-6);
}

TEST(AoAttenuation, IntegrationTimeOrdering) {
    for (int n = 1; n <= 6; ++n) {
        double prev = 0.0;
        for (double T : {0.5e-3, 1e-3, 2e-3, 4e-3}) {
            ao_config ao;
            ao.integration_time = T;
            ao.delay = 2.0 * T;
            const double g = ao_attenuation(ao, n, 0.4, 10.0);
            EXPECT_GT(g, prev) << n << " " << T;
            prev = g;
        }
    }
}

TEST(MeanEtaPhi, ClosedForms) {
    zernike_spectrum zero;
    zero.variance.assign(10, 0.0);
    zero.gamma2.assign(10, 1.0);
    EXPECT_EQ(mean_eta_phi(zero), 1.0);
    const residual_phase single({0.2}, {1.0});
    zernike_spectrum one;
    one.variance = {0.1};  // two modes at order 1
    one.gamma2 = {1.0};
    EXPECT_NEAR(mean_eta_phi(one), 1.0 / 1.2, 1e-14);
}

TEST(MeanEtaPhi, MonteCarloOracle) {
    ao_config ao;
    ao.n_max = 40;
    const auto s = make_spectrum(aperture_spec{}, 0.08, ao, 10.0);
    std::mt19937_64 g(3);
    std::normal_distribution<double> z;
    double acc = 0.0;
    const int N = 200'000;
    for (int i = 0; i < N; ++i) {
        double xi = 0.0;
        for (int n = 1; n <= s.n_max(); ++n)
            for (int m = 0; m <= n; ++m) {
                const double b = z(g);
                xi += s.residual(n) * b * b;
            }
        acc += std::exp(-xi);
    }
    EXPECT_NEAR(mean_eta_phi(s) / (acc / N), 1.0, 5e-3);
}

TEST(ResidualPhase, SingleModeChiSquare) {
    const double v = 0.05;
    const residual_phase xi({v}, {1.0});
    boost::math::chi_squared chi(1.0);
    double worst_cdf = 0.0;
    for (int i = 1; i <= 400; ++i) {
        const double x = xi.upper() * i / 400.0;
        worst_cdf = std::max(worst_cdf, std::abs(xi.cdf(x) - boost::math::cdf(chi, x / v)));
    }
    EXPECT_LT(worst_cdf, 1e-3);
    // density away from the integrable singularity at 0
    for (double x : {0.01, 0.05, 0.1, 0.3}) {
        const double ref = boost::math::pdf(chi, x / v) / v;
        EXPECT_NEAR(xi.pdf(x), ref, 1e-3 * std::max(1.0, ref)) << x;
    }
}

TEST(ResidualPhase, EqualModesGamma) {
    const double v = 0.02;
    const residual_phase xi({v}, {7.0});
    boost::math::gamma_distribution<double> ref(3.5, 2.0 * v);
    for (double x : {0.02, 0.1, 0.14, 0.2, 0.4}) {
        EXPECT_NEAR(xi.cdf(x), boost::math::cdf(ref, x), 1e-4) << x;
        EXPECT_NEAR(xi.pdf(x), boost::math::pdf(ref, x), 1e-3 * boost::math::pdf(ref, 0.14)) << x;
    }
}

TEST(ResidualPhase, MeanFromTable) {
    const auto s = make_spectrum(aperture_spec{}, 0.08, ao_config{}, 10.0);
    const residual_phase xi(s);
    double expected = 0.0;
    for (int n = 1; n <= s.n_max(); ++n) expected += (n + 1) * s.residual(n);
    EXPECT_NEAR(xi.mean(), expected, 1e-12 * expected);
    const auto t = xi.tabulate(4096);
    double m = 0.0;
    const double h = t.xi[1] - t.xi[0];
    for (std::size_t i = 0; i < t.xi.size(); ++i) m += t.xi[i] * t.pdf[i] * h;
    EXPECT_NEAR(m / expected, 1.0, 5e-3);
}

double ks_against_mc(const residual_phase& xi, const zernike_spectrum& s, int draws, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> z;
    std::vector<double> sample(static_cast<std::size_t>(draws));
    for (auto& x : sample) {
        double acc = 0.0;
        for (int n = 1; n <= s.n_max(); ++n)
            for (int m = 0; m <= n; ++m) {
                const double b = z(g);
                acc += s.residual(n) * b * b;
            }
        x = acc;
    }
    std::sort(sample.begin(), sample.end());
    double d = 0.0;
    const double N = static_cast<double>(draws);
    for (std::size_t i = 0; i < sample.size(); i += 97) {
        const double F = xi.cdf(sample[i]);
        d = std::max({d, std::abs(F - i / N), std::abs(F - (i + 1) / N)});
    }
    return d;
}

TEST(ResidualPhase, KolmogorovSmirnovVsMonteCarlo) {
    ao_config ao;
    ao.n_max = 40;
    const auto s = make_spectrum(aperture_spec{}, 0.1, ao, 10.0);
    EXPECT_LT(ks_against_mc(residual_phase(s), s, 100'000, 11), 0.01);
}

TEST(SmfPdf, DegenerateAndBounds) {
    const residual_phase none({0.0, 0.0}, {2.0, 3.0});
    EXPECT_TRUE(smf_pdf(0.7, none).is_point_mass());
    const auto s = make_spectrum(aperture_spec{}, 0.08, ao_config{}, 10.0);
    const auto d = smf_pdf(0.7, residual_phase(s));
    EXPECT_LE(d.mean(), 0.7);
    EXPECT_LE(d.support_max(), 0.7 + 1e-12);
}

TEST(SmfPdf, MoreCorrectionShiftsMassUp) {
    double prev = 0.0;
    for (int n_ao : {4, 6, 8}) {
        ao_config ao;
        ao.n_ao = n_ao;
        const auto d = smf_pdf(0.7, residual_phase(make_spectrum(aperture_spec{}, 0.05, ao, 10.0)));
        EXPECT_GT(d.mean(), prev);
        prev = d.mean();
    }
}

TEST(SmfPdf, FactorizedMeanUnderRayleigh) {
    const auto s = make_spectrum(aperture_spec{}, 0.08, ao_config{}, 10.0);
    ASSERT_TRUE(rayleigh_check(s).pass);
    const auto d = smf_pdf(1.0, residual_phase(s));
    EXPECT_NEAR(d.mean() / mean_eta_phi(s), 1.0, 0.10);
}

TEST(Rayleigh, Thresholds) {
    zernike_spectrum zero;
    zero.variance.assign(5, 0.0);
    zero.gamma2.assign(5, 1.0);
    const auto r0 = rayleigh_check(zero);
    EXPECT_EQ(r0.max_sigma, 0.0);
    EXPECT_TRUE(r0.pass);
    zernike_spectrum bad = zero;
    bad.variance[2] = std::pow(2.0 * pi * 0.06, 2);
    const auto r1 = rayleigh_check(bad);
    EXPECT_FALSE(r1.pass);
    EXPECT_EQ(r1.worst_order, 3);
    EXPECT_NEAR(r1.max_sigma, 0.06, 1e-12);
}

}  // namespace

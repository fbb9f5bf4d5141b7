#ifndef HAPQ_TURBULENCE_HPP
#define HAPQ_TURBULENCE_HPP

// Turbulence strength along a path: Hufnagel-Valley C_n^2 profile, Rytov
// variances, aperture-averaged scintillation, correlation width, Fried
// parameter, isoplanatic angle and log-amplitude variance.

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "numerics.hpp"

namespace hapq {

struct turbulence_profile {
    double cn2_ground = 9.6e-14;  // C_n^2(0), m^(-2/3)
    double wind_speed = 10.0;     // average transverse wind, m/s
    double background = 2.7e-16;  // coefficient of the 1.5 km scale-height term
};

/// Profile with no turbulence at any altitude.
inline turbulence_profile calm_profile() { return {0.0, 0.0, 0.0}; }

enum class logamp_convention { full, quarter };

struct turbulence_stats {
    double rytov = 0.0;            // sigma_R^2
    double spherical_rytov = 0.0;  // beta_0^2
    double scint_index = 0.0;      // sigma_I^2(D_Rx)
    double corr_width = 0.0;       // rho_c
    double fried = infinity;       // r0
    double isoplanatic = infinity; // theta_0 (uplink only)
    double log_amp = 0.0;          // sigma_chi^2
};

/// Hufnagel-Valley refractive-index structure constant at altitude h (m).
inline double cn2(double h, const turbulence_profile& p) {
    const double v = p.wind_speed / 27.0;
    const double x = 1e-5 * h;
    return 0.00594 * v * v * std::pow(x, 10) * std::exp(-h / 1000.0) +
           p.background * std::exp(-h / 1500.0) +
           p.cn2_ground * std::exp(-h / 100.0);
}

inline bool is_calm(const turbulence_profile& p) {
    return p.cn2_ground == 0.0 && p.wind_speed == 0.0 && p.background == 0.0;
}

namespace detail {

// Breakpoints following the HV scale heights so each piece is smooth.
inline std::vector<double> altitude_breaks(double h0, double H) {
    std::vector<double> out{h0};
    for (double b : {100.0, 300.0, 1000.0, 3000.0, 6000.0, 10000.0, 15000.0, 20000.0, 30000.0}) {
        if (b > h0 + 1e-9 && b < H - 1e-9) out.push_back(b);
    }
    out.push_back(H);
    return out;
}

inline quadrature_options path_quadrature() { return {1e-6, 1e-30, std::size_t{1} << 20}; }

}  // namespace detail

/// Rytov variance of a horizontal path of constant C_n^2.
inline double rytov_horizontal(double cn2_value, double k, double z) {
    return 1.23 * cn2_value * std::pow(k, 7.0 / 6.0) * std::pow(z, 11.0 / 6.0);
}

/// Rytov variance of a slant spherical wave between h0 and H.
inline double rytov_downlink(const turbulence_profile& p, const link_geometry& g, double k) {
    if (is_calm(p)) return 0.0;
    const double h0 = g.ground_alt;
    const double H = g.platform_alt;
    const double span = H - h0;
    auto f = [&](double h) {
        const double a = h - h0;
        const double b = (H - h) / span;
        if (a <= 0.0 || b <= 0.0) return 0.0;
        return cn2(h, p) * std::pow(a, 5.0 / 6.0) * std::pow(b, 5.0 / 6.0);
    };
    const double integral = integrate(f, detail::altitude_breaks(h0, H), detail::path_quadrature());
    return 2.25 * std::pow(k, 7.0 / 6.0) * std::pow(1.0 / std::cos(g.zenith), 11.0 / 6.0) * integral;
}

/// Irradiance correlation width; the weak branch applies for sigma_R^2 <= 1.
inline double correlation_width(double rytov, double wavelength, double z) {
    const double weak = std::sqrt(wavelength * z);
    if (rytov <= 1.0) return weak;
    return 0.36 * std::pow(rytov, -3.0 / 10.0) * weak;
}

inline double spherical_rytov(double rytov) { return 0.4065 * rytov; }

/// Aperture-averaged scintillation index of a spherical wave.
inline double scint_index_aperture(double beta0_sq, double k, double z, double aperture_diameter) {
    const double d2 = k * aperture_diameter * aperture_diameter / (4.0 * z);
    const double b125 = std::pow(beta0_sq, 6.0 / 5.0);
    const double t1 = 0.49 * beta0_sq / std::pow(1.0 + 0.18 * d2 + 0.56 * b125, 7.0 / 6.0);
    const double t2 = 0.51 * beta0_sq * std::pow(1.0 + 0.69 * b125, -5.0 / 6.0) /
                      (1.0 + 0.90 * d2 + 0.62 * d2 * b125);
    return std::expm1(t1 + t2);
}

/// Coherence width of a Gaussian beam on a slant path (receiver at h0).
inline double fried_downlink(const turbulence_profile& p, const link_geometry& g, const beam_state& beam) {
    if (is_calm(p)) return infinity;
    const double h0 = g.ground_alt;
    const double H = g.platform_alt;
    const double span = H - h0;
    const auto breaks = detail::altitude_breaks(h0, H);
    const auto opt = detail::path_quadrature();
    const double mu1 = integrate(
        [&](double h) {
            const double xi = (h - h0) / span;
            return cn2(h, p) * std::pow(beam.theta + beam.theta_bar * (1.0 - xi), 5.0 / 3.0);
        },
        breaks, opt);
    const double mu2 = integrate(
        [&](double h) { return cn2(h, p) * std::pow((h - h0) / span, 5.0 / 3.0); }, breaks, opt);
    const double k = beam.wavenumber;
    const double denom = 0.423 * k * k * (mu1 + 0.622 * mu2 * std::pow(beam.lambda, 11.0 / 6.0));
    return std::pow(std::cos(g.zenith) / denom, 3.0 / 5.0);
}

/// Coherence width of a Gaussian beam on a horizontal path of constant C_n^2.
inline double fried_horizontal(double cn2_value, double wavelength, double z, const beam_state& beam) {
    if (cn2_value <= 0.0) return infinity;
    const double a = beam.curvature_param;
    const double k = 2.0 * pi / wavelength;
    return std::pow(8.0 / (3.0 * (a + 0.618 * std::pow(beam.lambda, 11.0 / 6.0))), 3.0 / 5.0) *
           std::pow(0.423 * cn2_value * k * k * z, -3.0 / 5.0);
}

/// Isoplanatic angle of a Gaussian beam transmitted upward from h0.
inline double isoplanatic_angle_uplink(const turbulence_profile& p, const link_geometry& g,
                                       const beam_state& beam) {
    if (is_calm(p)) return infinity;
    const double h0 = g.ground_alt;
    const double H = g.platform_alt;
    const double span = H - h0;
    const auto breaks = detail::altitude_breaks(h0, H);
    const auto opt = detail::path_quadrature();
    const double mu1 = integrate(
        [&](double h) {
            const double xi = (h - h0) / span;
            return cn2(h, p) * std::pow(beam.theta + beam.theta_bar * xi, 5.0 / 3.0);
        },
        breaks, opt);
    const double mu2 = integrate(
        [&](double h) { return cn2(h, p) * std::pow(1.0 - (h - h0) / span, 5.0 / 3.0); }, breaks, opt);
    const double k = beam.wavenumber;
    const double bracket = 2.91 * k * k * (mu1 + 0.62 * mu2 * std::pow(beam.lambda, 11.0 / 6.0));
    return std::pow(std::cos(g.zenith), 8.0 / 5.0) / (span * std::pow(bracket, 3.0 / 5.0));
}

enum class link_kind { downlink, uplink, horizontal, fiber };

/// Log-amplitude variance. `strength` is sigma_I^2 for slant links and
/// sigma_R^2 for horizontal links (where sigma_I^2 = sigma_R^2 is implied).
inline double log_amp_variance(link_kind kind, double strength, logamp_convention conv = logamp_convention::full) {
    if (conv == logamp_convention::quarter) return 0.25 * std::log1p(strength);
    if (kind == link_kind::horizontal) return std::pow(1.0 + strength, -0.25);
    return std::log1p(strength);
}

}  // namespace hapq

#endif  // HAPQ_TURBULENCE_HPP

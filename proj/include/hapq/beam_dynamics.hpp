#ifndef HAPQ_BEAM_DYNAMICS_HPP
#define HAPQ_BEAM_DYNAMICS_HPP

// Turbulence-induced beam broadening and wandering, and their combination with
// mechanical pointing error and tracking.

#include <cmath>
#include <string>

#include "errors.hpp"
#include "geometry.hpp"
#include "numerics.hpp"
#include "turbulence.hpp"

namespace hapq {

struct pointing_config {
    double pointing_error = 1e-6;  // theta_pe, rad
    double tracking_eff = 0.8;     // eta_tr
};

struct beam_spread {
    double long_term = 0.0;    // W_LT
    double short_term = 0.0;   // W_ST
    double wander_var = 0.0;   // <r_c^2>
    double total_wander = 0.0; // sigma_wander
};

/// Long-term beam radius W_LT including diffraction and turbulent broadening.
inline double long_term_radius(const beam_state& beam, double rytov) {
    const double w0 = beam.waist;
    const double z = beam.distance;
    const double diff = beam.wavelength * z / (pi * w0 * w0);
    const double turb = 1.63 * std::pow(rytov, 6.0 / 5.0) * 2.0 * z / (beam.wavenumber * w0 * w0);
    return w0 * std::sqrt(1.0 + diff * diff + turb);
}

namespace detail {

inline double wander_denominator(const beam_state& beam, double rytov, double xi) {
    const double curv = beam.theta0 + beam.theta0_bar * xi;
    return std::pow(curv * curv + 1.63 * std::pow(rytov, 6.0 / 5.0) * beam.lambda0 *
                                      std::pow(1.0 - xi, 16.0 / 5.0),
                    1.0 / 6.0);
}

}  // namespace detail

/// Beam-wander variance <r_c^2> on a horizontal path of constant C_n^2.
inline double wander_variance_horizontal(double cn2_value, double z, const beam_state& beam, double rytov) {
    if (cn2_value <= 0.0) return 0.0;
    const double integral = integrate(
        [&](double xi) { return xi * xi / detail::wander_denominator(beam, rytov, xi); }, 0.0, 1.0,
        detail::path_quadrature());
    return 7.25 * cn2_value * z * z * z * std::pow(beam.waist, -1.0 / 3.0) * integral;
}

/// Beam-wander variance <r_c^2> on a slant path, integrated over altitude.
inline double wander_variance_downlink(const turbulence_profile& p, const link_geometry& g,
                                       const beam_state& beam, double rytov) {
    if (is_calm(p)) return 0.0;
    const double h0 = g.ground_alt;
    const double H = g.platform_alt;
    const double span = H - h0;
    const double integral = integrate(
        [&](double h) {
            const double dh = h - h0;
            // the last factor in the bracket is ((H - h)/(H - h0))^{16/5} = (1 - xi)^{16/5}
            return cn2(h, p) * dh * dh / detail::wander_denominator(beam, rytov, dh / span);
        },
        detail::altitude_breaks(h0, H), detail::path_quadrature());
    const double sec = 1.0 / std::cos(g.zenith);
    return 7.25 * sec * sec * sec * std::pow(beam.waist, -1.0 / 3.0) * integral;
}

/// Total wander variance sigma_wander^2 with pointing error and tracking.
inline double total_wander(double z, double wander_var, const pointing_config& pointing) {
    if (pointing.pointing_error < 0.0 || pointing.tracking_eff < 0.0 || pointing.tracking_eff > 1.0)
        throw config_error("pointing: need theta_pe >= 0 and 0 <= eta_tr <= 1");
    const double mech = z * pointing.pointing_error;
    return (mech * mech + wander_var) * (1.0 - pointing.tracking_eff);
}

/// Short-term radius from W_LT^2 = W_ST^2 + <r_c^2>.
inline double short_term_radius(double long_term, double wander_var) {
    const double arg = long_term * long_term - wander_var;
    if (!(arg > 0.0))
        throw model_breakdown("beam wander variance " + std::to_string(wander_var) +
                              " m^2 exceeds W_LT^2 = " + std::to_string(long_term * long_term) + " m^2");
    return std::sqrt(arg);
}

inline beam_spread make_beam_spread(double long_term, double wander_var, double z, const pointing_config& pointing) {
    beam_spread s;
    s.long_term = long_term;
    s.wander_var = wander_var;
    s.short_term = short_term_radius(long_term, wander_var);
    s.total_wander = std::sqrt(total_wander(z, wander_var, pointing));
    return s;
}

}  // namespace hapq

#endif  // HAPQ_BEAM_DYNAMICS_HPP

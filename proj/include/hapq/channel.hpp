#ifndef HAPQ_CHANNEL_HPP
#define HAPQ_CHANNEL_HPP

// Complete channel models: downlink, uplink, horizontal and fiber. Each model
// carries the atmospheric transmittance, collection and coupling
// distributions, detector efficiency and a validity report.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "beam_dynamics.hpp"
#include "collection.hpp"
#include "coupling.hpp"
#include "distribution.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "transmittance.hpp"
#include "turbulence.hpp"

namespace hapq {

struct validity_check {
    bool applicable = false;
    bool pass = true;
    double value = 0.0;
    double threshold = 0.0;
};

struct validity_report {
    validity_check aperture_averaging;  // value D_Rx, threshold rho_c
    validity_check rayleigh;            // value max sigma_j in waves, threshold 0.05
    validity_check small_wander;        // value sigma_wander / r_Rx, threshold 1
    std::vector<std::string> notes;

    bool all_pass() const { return aperture_averaging.pass && rayleigh.pass && small_wander.pass; }
};

/// Parameters shared by the free-space builders. `waist` belongs to the
/// transmitter; `aperture`, `ao` and `p_det` to the receiving side.
struct link_params {
    double wavelength = 1550e-9;
    double waist = 0.1;
    aperture_spec aperture{};
    ao_config ao{};
    pointing_config pointing{};
    turbulence_profile profile{};
    logamp_convention logamp = logamp_convention::full;
    bool split_eta_phi = false;
    double p_det = 0.85;
    std::size_t cells = default_grid_cells;
};

struct channel_model {
    link_kind kind = link_kind::fiber;
    link_geometry geometry{};
    double eta_atm = 1.0;  // fiber transmissivity for fiber links
    efficiency_distribution collection = efficiency_distribution::point_mass(1.0);
    efficiency_distribution coupling = efficiency_distribution::point_mass(1.0);
    double p_det = 1.0;
    double mean_efficiency = 1.0;
    turbulence_stats stats{};
    beam_spread spread{};
    double eta0_coupling = 1.0;
    double eta_aniso = 1.0;
    double mean_eta_phi = 1.0;  // analytic estimate
    validity_report validity{};
    std::vector<std::string> warnings;
};

inline const char* to_string(link_kind k) {
    switch (k) {
        case link_kind::downlink: return "downlink";
        case link_kind::uplink: return "uplink";
        case link_kind::horizontal: return "horizontal";
        case link_kind::fiber: return "fiber";
    }
    return "?";
}

namespace detail {

inline void finish_channel(channel_model& ch) {
    ch.mean_efficiency = ch.eta_atm * ch.collection.mean() * ch.coupling.mean() * ch.p_det;
    auto& v = ch.validity;
    if (v.aperture_averaging.applicable && !v.aperture_averaging.pass)
        ch.warnings.push_back("aperture averaging: D_Rx=" + std::to_string(v.aperture_averaging.value) +
                              " m does not exceed rho_c=" + std::to_string(v.aperture_averaging.threshold) + " m");
    if (v.rayleigh.applicable && !v.rayleigh.pass)
        ch.warnings.push_back("rayleigh: max residual sigma_j=" + std::to_string(v.rayleigh.value) +
                              " waves exceeds " + std::to_string(v.rayleigh.threshold));
    if (v.small_wander.applicable && !v.small_wander.pass)
        ch.warnings.push_back("small wander: sigma_wander/r_Rx=" + std::to_string(v.small_wander.value) +
                              " is not below 1");
}

inline void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw config_error(std::string(name) + " must lie in [0, 1]");
}

inline void query_transmittance(channel_model& ch, const transmittance_provider& atm, double zenith_deg) {
    const auto& g = ch.geometry;
    ch.eta_atm = atm(zenith_deg, g.ground_alt, g.platform_alt);
    auto w = atm.hull_warning(zenith_deg, g.ground_alt, g.platform_alt);
    if (!w.empty()) ch.warnings.push_back(std::move(w));
}

// Slant pipeline shared by downlink and uplink.
inline channel_model build_slant(link_kind kind, const link_geometry& g, const link_params& lp,
                                 const transmittance_provider& atm) {
    check_probability(lp.p_det, "detector efficiency");
    channel_model ch;
    ch.kind = kind;
    ch.geometry = g;
    ch.p_det = lp.p_det;
    const double z = g.slant_range;
    const double D = lp.aperture.diameter;
    const auto beam = gaussian_beam_params(lp.wavelength, lp.waist, z);
    const double k = beam.wavenumber;

    auto& st = ch.stats;
    st.rytov = rytov_downlink(lp.profile, g, k);
    st.spherical_rytov = spherical_rytov(st.rytov);
    st.scint_index = scint_index_aperture(st.spherical_rytov, k, z, D);
    st.corr_width = correlation_width(st.rytov, lp.wavelength, z);
    st.fried = fried_downlink(lp.profile, g, beam);
    st.log_amp = log_amp_variance(link_kind::downlink, st.scint_index, lp.logamp);

    const double w_lt = long_term_radius(beam, st.rytov);
    const double rc2 = wander_variance_downlink(lp.profile, g, beam, st.rytov);
    ch.spread = make_beam_spread(w_lt, rc2, z, lp.pointing);

    const collection_params cp{D / 2.0, ch.spread.short_term, ch.spread.total_wander, st.scint_index};
    ch.collection = general_pdf(cp, lp.cells);

    ch.eta0_coupling = eta0_max(lp.aperture);
    const double eta_max = ch.eta0_coupling * eta_chi(st.log_amp);
    const auto spectrum = make_spectrum(lp.aperture, st.fried, lp.ao, lp.profile.wind_speed);
    ch.coupling = smf_pdf(eta_max, residual_phase(spectrum), lp.cells);
    ch.mean_eta_phi = mean_eta_phi(spectrum, lp.split_eta_phi);

    query_transmittance(ch, atm, g.zenith * 180.0 / pi);

    auto& v = ch.validity;
    v.aperture_averaging = {true, D > st.corr_width, D, st.corr_width};
    const auto ray = rayleigh_check(spectrum);
    v.rayleigh = {true, ray.pass, ray.max_sigma, 0.05};
    const double ratio = ch.spread.total_wander / (D / 2.0);
    v.small_wander = {true, ratio < 1.0, ratio, 1.0};
    return ch;
}

}  // namespace detail

/// Balloon-to-ground link with AO at the ground receiver.
inline channel_model build_downlink(const link_geometry& g, const link_params& lp, const transmittance_provider& atm) {
    auto ch = detail::build_slant(link_kind::downlink, g, lp, atm);
    detail::finish_channel(ch);
    return ch;
}

/// Ground-to-balloon link by reciprocity: the downlink pipeline with the
/// ground beam waist and the balloon aperture, AO pre-compensation at the
/// ground, and an anisoplanatic loss from the pointing error.
inline channel_model build_uplink(const link_geometry& g, const link_params& lp, const transmittance_provider& atm) {
    auto ch = detail::build_slant(link_kind::uplink, g, lp, atm);
    const auto beam = gaussian_beam_params(lp.wavelength, lp.waist, g.slant_range);
    ch.stats.isoplanatic = isoplanatic_angle_uplink(lp.profile, g, beam);
    const double ratio = std::isinf(ch.stats.isoplanatic) ? 0.0 : lp.pointing.pointing_error / ch.stats.isoplanatic;
    ch.eta_aniso = std::exp(-std::pow(ratio, 5.0 / 3.0));
    ch.coupling = ch.coupling.scaled(ch.eta_aniso);
    ch.validity.notes.push_back("uplink wander and collection statistics taken from the reciprocal downlink");
    detail::finish_channel(ch);
    if (!ch.validity.rayleigh.pass)
        ch.warnings.push_back("uplink: AO pre-compensation outside the Rayleigh regime");
    return ch;
}

/// Balloon-to-balloon link at common altitude H, z apart. Turbulence and
/// transmittance are taken at the lowest point of the path. Only beam
/// wandering enters the collection, and coupling is the uncorrected mean.
inline channel_model build_horizontal(double H, double z, const link_params& lp, const transmittance_provider& atm) {
    detail::check_probability(lp.p_det, "detector efficiency");
    channel_model ch;
    ch.kind = link_kind::horizontal;
    ch.geometry = make_horizontal_geometry(H, z);
    ch.p_det = lp.p_det;
    const double h_min = ch.geometry.ground_alt;
    const double D = lp.aperture.diameter;
    const auto beam = gaussian_beam_params(lp.wavelength, lp.waist, z);
    const double c = cn2(h_min, lp.profile);

    auto& st = ch.stats;
    st.rytov = rytov_horizontal(c, beam.wavenumber, z);
    st.spherical_rytov = spherical_rytov(st.rytov);
    st.scint_index = st.rytov;
    st.corr_width = correlation_width(st.rytov, lp.wavelength, z);
    st.fried = fried_horizontal(c, lp.wavelength, z, beam);
    st.log_amp = log_amp_variance(link_kind::horizontal, st.rytov, lp.logamp);

    const double w_lt = long_term_radius(beam, st.rytov);
    const double rc2 = wander_variance_horizontal(c, z, beam, st.rytov);
    ch.spread = make_beam_spread(w_lt, rc2, z, lp.pointing);
    ch.collection = weibull_pdf({D / 2.0, ch.spread.short_term, ch.spread.total_wander, 0.0}, lp.cells);

    ch.eta0_coupling = eta0_max(lp.aperture);
    const auto spectrum = uncorrected_spectrum(lp.aperture, st.fried, lp.ao.n_max);
    ch.mean_eta_phi = mean_eta_phi(spectrum, lp.split_eta_phi);
    const double coupling = ch.eta0_coupling * eta_chi(st.log_amp) * ch.mean_eta_phi;
    if (!(coupling >= 0.0 && coupling <= 1.0))
        throw model_breakdown("horizontal coupling mean " + std::to_string(coupling) + " outside [0, 1]");
    ch.coupling = efficiency_distribution::point_mass(coupling);

    detail::query_transmittance(ch, atm, 90.0);

    auto& v = ch.validity;
    v.aperture_averaging = {true, D > st.corr_width, D, st.corr_width};
    const auto ray = rayleigh_check(spectrum);
    v.rayleigh = {true, ray.pass, ray.max_sigma, 0.05};
    const double ratio = ch.spread.total_wander / (D / 2.0);
    v.small_wander = {true, ratio < 1.0, ratio, 1.0};
    detail::finish_channel(ch);
    return ch;
}

inline double fiber_transmissivity(double length_km, double loss_db_per_km = 0.18) {
    if (!(length_km >= 0.0)) throw config_error("fiber length must be >= 0 km");
    if (!(loss_db_per_km >= 0.0)) throw config_error("fiber loss must be >= 0 dB/km");
    return std::pow(10.0, -loss_db_per_km * length_km / 10.0);
}

inline channel_model build_fiber(double length_km, double p_det, double loss_db_per_km = 0.18) {
    detail::check_probability(p_det, "detector efficiency");
    channel_model ch;
    ch.kind = link_kind::fiber;
    ch.eta_atm = fiber_transmissivity(length_km, loss_db_per_km);
    ch.p_det = p_det;
    detail::finish_channel(ch);
    return ch;
}

/// Whether one photon survives the channel, given three independent uniforms.
inline bool sample_transmission(const channel_model& ch, double u_collection, double u_coupling, double u_bernoulli) {
    const double eta = ch.eta_atm * ch.collection.sample(u_collection) * ch.coupling.sample(u_coupling) * ch.p_det;
    return u_bernoulli < eta;
}

inline const validity_report& validity_of(const channel_model& ch) { return ch.validity; }

}  // namespace hapq

#endif  // HAPQ_CHANNEL_HPP

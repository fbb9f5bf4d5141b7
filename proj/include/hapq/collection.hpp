#ifndef HAPQ_COLLECTION_HPP
#define HAPQ_COLLECTION_HPP

// Receiver collection efficiency: log-negative Weibull distribution for
// wandering-dominated links and a mixture of truncated log-normals over the
// wander displacement for the general case.

#include <cmath>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "errors.hpp"
#include "numerics.hpp"

namespace hapq {

struct collection_params {
    double aperture_radius = 0.0;  // r_Rx
    double short_term = 0.0;       // W_ST
    double wander_sigma = 0.0;     // sigma_wander
    double scint_index = 0.0;      // sigma_I^2(D_Rx)
};

struct weibull_shape {
    double eta0 = 0.0;  // maximal transmittance through the aperture
    double l = 0.0;     // shape
    double R = 0.0;     // scale, m
};

inline weibull_shape weibull_params(double aperture_radius, double short_term) {
    if (!(aperture_radius > 0.0) || !(short_term > 0.0))
        throw invalid_geometry("weibull_params: aperture radius and W_ST must be positive");
    const double x = 4.0 * aperture_radius * aperture_radius / (short_term * short_term);
    const double i0 = scaled_bessel_i(0, x);
    const double i1 = scaled_bessel_i(1, x);
    weibull_shape s;
    s.eta0 = -std::expm1(-0.5 * x);
    const double denom = 1.0 - i0;
    const double log_term = std::log(2.0 * s.eta0 / denom);
    s.l = 2.0 * x * i1 / denom / log_term;
    s.R = aperture_radius * std::pow(log_term, -1.0 / s.l);
    return s;
}

/// Weibull CDF P(eta_DRx <= eta) for wander standard deviation sigma.
inline double weibull_cdf(const weibull_shape& s, double sigma, double eta) {
    if (eta <= 0.0) return 0.0;
    if (eta >= s.eta0) return 1.0;
    const double lg = std::log(s.eta0 / eta);
    return std::exp(-s.R * s.R * std::pow(lg, 2.0 / s.l) / (2.0 * sigma * sigma));
}

/// Weibull density as printed, for 0 < eta < eta0.
inline double weibull_density(const weibull_shape& s, double sigma, double eta) {
    if (eta <= 0.0 || eta >= s.eta0) return 0.0;
    const double lg = std::log(s.eta0 / eta);
    const double s2 = sigma * sigma;
    return s.R * s.R / (s2 * eta * s.l) * std::pow(lg, 2.0 / s.l - 1.0) *
           std::exp(-s.R * s.R / (2.0 * s2) * std::pow(lg, 2.0 / s.l));
}

/// Mean collection efficiency conditioned on a beam displacement r.
inline double conditional_mean(const weibull_shape& s, double r) {
    return s.eta0 * std::exp(-std::pow(r / s.R, s.l));
}

inline efficiency_distribution weibull_pdf(const collection_params& p, std::size_t cells = default_grid_cells) {
    const auto s = weibull_params(p.aperture_radius, p.short_term);
    if (!(p.wander_sigma > 0.0)) return efficiency_distribution::point_mass(s.eta0);
    std::vector<double> masses(cells);
    const double w = s.eta0 / static_cast<double>(cells);
    double prev = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double next = i + 1 == cells ? 1.0 : weibull_cdf(s, p.wander_sigma, w * static_cast<double>(i + 1));
        masses[i] = next - prev;
        prev = next;
    }
    return efficiency_distribution::from_masses(0.0, s.eta0, std::move(masses));
}

/// Truncated log-normal of the beam-spot distortion at fixed displacement.
struct truncated_lognormal {
    double mu = 0.0;     // ln(eta) ~ N(-mu, sigma^2)
    double sigma = 0.0;
    double norm = 1.0;   // F(1)

    static truncated_lognormal from_moments(double mean, double scint_index) {
        truncated_lognormal t;
        // mu = -ln(<eta>^2 / sqrt(<eta^2>)), <eta^2> = <eta>^2 (1 + sigma_I^2)
        t.mu = -std::log(mean) + 0.5 * std::log1p(scint_index);
        t.sigma = std::sqrt(std::log1p(scint_index));
        t.norm = normal_cdf(t.mu / t.sigma);
        return t;
    }

    double cdf(double eta) const {
        if (eta <= 0.0) return 0.0;
        if (eta >= 1.0) return 1.0;
        return normal_cdf((std::log(eta) + mu) / sigma) / norm;
    }

    double density(double eta) const {
        if (eta <= 0.0 || eta > 1.0) return 0.0;
        const double z = (std::log(eta) + mu) / sigma;
        return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * pi) * eta * sigma * norm);
    }
};

namespace detail {

inline constexpr std::size_t radial_nodes = 64;
inline constexpr double radial_extent = 5.0;  // in units of sigma_wander

}  // namespace detail

/// Law-of-total-probability collection PDF over Gaussian beam displacement.
/// The support extends to min(1, eta0 e^{8 sigma}) because the conditional
/// log-normal reaches above eta0 when scintillation is present.
inline efficiency_distribution general_pdf(const collection_params& p, std::size_t cells = default_grid_cells) {
    if (!(p.scint_index > 0.0)) return weibull_pdf(p, cells);
    const auto s = weibull_params(p.aperture_radius, p.short_term);

    const auto at_center = truncated_lognormal::from_moments(s.eta0, p.scint_index);
    const double hi = std::min(1.0, std::exp(-at_center.mu + 8.0 * at_center.sigma));

    std::vector<double> edge_cdf(cells + 1, 0.0);
    if (!(p.wander_sigma > 0.0)) {
        for (std::size_t k = 1; k <= cells; ++k)
            edge_cdf[k] = at_center.cdf(hi * static_cast<double>(k) / static_cast<double>(cells));
    } else {
        // The conditional CDF in r is close to a step at the displacement whose
        // conditional median equals x, so the radial integral is split there.
        const double sw = p.wander_sigma;
        const double r_max = detail::radial_extent * sw;
        const double shrink = std::sqrt(1.0 + p.scint_index);  // mean / median
        const auto unit = gauss_legendre(detail::radial_nodes / 2, 0.0, 1.0);
        auto piece = [&](double a, double b, double x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < unit.nodes.size(); ++i) {
                const double r = a + (b - a) * unit.nodes[i];
                const double w = (b - a) * unit.weights[i] * r * std::exp(-r * r / (2.0 * sw * sw)) / (sw * sw);
                acc += w * truncated_lognormal::from_moments(conditional_mean(s, r), p.scint_index).cdf(x);
            }
            return acc;
        };
        for (std::size_t k = 1; k <= cells; ++k) {
            const double x = hi * static_cast<double>(k) / static_cast<double>(cells);
            const double lg = std::log(s.eta0 / (x * shrink));
            const double r_star = lg > 0.0 ? std::min(r_max, s.R * std::pow(lg, 1.0 / s.l)) : 0.0;
            double acc = 0.0;
            if (r_star > 0.0) acc += piece(0.0, r_star, x);
            if (r_star < r_max) acc += piece(r_star, r_max, x);
            edge_cdf[k] = acc;
        }
    }
    std::vector<double> masses(cells);
    // quadrature error moves with the split point; keep the CDF monotone
    for (std::size_t k = 1; k <= cells; ++k) edge_cdf[k] = std::max(edge_cdf[k], edge_cdf[k - 1]);
    for (std::size_t k = 0; k < cells; ++k) masses[k] = edge_cdf[k + 1] - edge_cdf[k];
    return efficiency_distribution::from_masses(0.0, hi, std::move(masses));
}

}  // namespace hapq

#endif  // HAPQ_COLLECTION_HPP

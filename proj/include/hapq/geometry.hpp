#ifndef HAPQ_GEOMETRY_HPP
#define HAPQ_GEOMETRY_HPP

// Spherical-Earth link geometry and collimated Gaussian-beam parameters.
// Lengths in meters, angles in radians.

#include <cmath>
#include <optional>
#include <string>

#include "errors.hpp"
#include "numerics.hpp"

namespace hapq {

inline constexpr double earth_radius_m = 6'371'000.0;

struct link_geometry {
    double ground_alt = 0.0;    // h0
    double platform_alt = 0.0;  // H
    double zenith = 0.0;        // theta_z
    double earth_radius = earth_radius_m;
    double slant_range = 0.0;  // z
    std::optional<double> arc_length;
    std::optional<double> subtending_angle;
    std::optional<double> min_altitude;  // horizontal links only
};

struct beam_state {
    double wavelength = 0.0;
    double wavenumber = 0.0;
    double waist = 0.0;          // W0
    double rayleigh_range = 0.0; // z0
    double distance = 0.0;       // z the state was evaluated at
    double radius = 0.0;         // W(z)
    double curvature_radius = infinity;  // F(z)
    double gouy_phase = 0.0;     // zeta(z)
    // Transmitter-plane parameters.
    double theta0 = 1.0;
    double theta0_bar = 0.0;
    double lambda0 = 0.0;
    // Receiver-plane parameters.
    double theta = 1.0;
    double theta_bar = 0.0;
    double lambda = 0.0;
    double curvature_param = 8.0 / 3.0;  // a
};

inline double wavenumber(double wavelength) { return 2.0 * pi / wavelength; }

/// Distance from a ground station at h0 to a platform at altitude H seen at zenith angle theta_z.
inline double slant_range(double h0, double H, double zenith, double earth_radius = earth_radius_m) {
    if (!(H > h0) || h0 < 0.0)
        throw invalid_geometry("slant_range: need H > h0 >= 0 (h0=" + std::to_string(h0) +
                               ", H=" + std::to_string(H) + ")");
    if (!(zenith >= 0.0 && zenith < pi / 2.0))
        throw invalid_geometry("slant_range: zenith angle must lie in [0, pi/2)");
    const double rb = earth_radius + H;
    const double rg = earth_radius + h0;
    const double c = std::cos(zenith);
    if (zenith == 0.0) return H - h0;
    return std::sqrt(rb * rb + rg * rg * (c * c - 1.0)) - rg * c;
}

/// Distance between a point at altitude h0 and a point at altitude H separated by
/// the surface arc length s.
inline double slant_range_from_arc(double h0, double H, double arc, double earth_radius = earth_radius_m) {
    if (arc < 0.0) throw invalid_geometry("slant_range_from_arc: arc length must be >= 0");
    const double rg = earth_radius + h0;
    const double rs = earth_radius + H;
    const double ts = arc / earth_radius;
    // 1 - cos written as 2 sin^2(ts/2) to keep short arcs accurate.
    const double half = std::sin(0.5 * ts);
    const double d2 = (rs - rg) * (rs - rg) + 4.0 * rg * rs * half * half;
    return std::sqrt(std::max(d2, 0.0));
}

/// Zenith angle at the ground station of a platform at altitude H, arc length s away.
/// Computed from the triangle (R_G, R_S, theta_s).
inline double zenith_from_arc(double h0, double H, double arc, double earth_radius = earth_radius_m) {
    const double rg = earth_radius + h0;
    const double rs = earth_radius + H;
    const double ts = arc / earth_radius;
    const double dx = rs * std::sin(ts);
    const double dy = rs * std::cos(ts) - rg;
    return std::atan2(dx, dy);
}

/// Lowest altitude along the straight chord between two platforms at altitude H,
/// z apart.
inline double horizontal_min_altitude(double H, double z, double earth_radius = earth_radius_m) {
    const double r = H + earth_radius;
    if (!(z >= 0.0 && z < 2.0 * r))
        throw invalid_geometry("horizontal_min_altitude: need 0 <= z < 2(H + R_E)");
    const double ts = std::asin(z / (2.0 * r));
    const double hmin = std::cos(ts) * r - earth_radius;
    if (hmin < 0.0)
        throw invalid_geometry("horizontal_min_altitude: path between platforms at H=" +
                               std::to_string(H) + " m, z=" + std::to_string(z) +
                               " m intersects the Earth (h_min=" + std::to_string(hmin) + " m)");
    return hmin;
}

/// Geometry of a ground-to-platform link given by zenith angle.
inline link_geometry make_slant_geometry(double h0, double H, double zenith,
                                         double earth_radius = earth_radius_m) {
    link_geometry g;
    g.ground_alt = h0;
    g.platform_alt = H;
    g.zenith = zenith;
    g.earth_radius = earth_radius;
    g.slant_range = slant_range(h0, H, zenith, earth_radius);
    return g;
}

/// Geometry of a ground-to-platform link given by surface arc length.
inline link_geometry make_slant_geometry_from_arc(double h0, double H, double arc,
                                                  double earth_radius = earth_radius_m) {
    if (!(H > h0) || h0 < 0.0) throw invalid_geometry("slant link: need H > h0 >= 0");
    link_geometry g;
    g.ground_alt = h0;
    g.platform_alt = H;
    g.earth_radius = earth_radius;
    g.arc_length = arc;
    g.subtending_angle = arc / earth_radius;
    g.zenith = zenith_from_arc(h0, H, arc, earth_radius);
    if (!(g.zenith < pi / 2.0))
        throw invalid_geometry("slant link: platform is below the local horizon");
    g.slant_range = slant_range_from_arc(h0, H, arc, earth_radius);
    return g;
}

/// Geometry of a platform-to-platform link at common altitude H, z apart.
inline link_geometry make_horizontal_geometry(double H, double z, double earth_radius = earth_radius_m) {
    link_geometry g;
    g.platform_alt = H;
    g.earth_radius = earth_radius;
    g.slant_range = z;
    g.zenith = pi / 2.0;
    g.subtending_angle = 2.0 * std::asin(std::min(1.0, z / (2.0 * (H + earth_radius))));
    g.arc_length = *g.subtending_angle * earth_radius;
    g.min_altitude = horizontal_min_altitude(H, z, earth_radius);
    g.ground_alt = *g.min_altitude;
    return g;
}

/// Curvature parameter a of the horizontal Fried parameter, branching on the sign of Theta.
inline double curvature_parameter(double theta) {
    if (std::abs(1.0 - theta) < 1e-12) return 8.0 / 3.0;
    if (theta >= 0.0) return (1.0 - std::pow(theta, 8.0 / 3.0)) / (1.0 - theta);
    return (1.0 + std::pow(-theta, 8.0 / 3.0)) / (1.0 - theta);
}

/// Collimated Gaussian beam of waist W0 evaluated after propagating z.
inline beam_state gaussian_beam_params(double wavelength, double waist, double z) {
    if (!(wavelength > 0.0) || !(waist > 0.0) || z < 0.0)
        throw invalid_geometry("gaussian_beam_params: need wavelength, W0 > 0 and z >= 0");
    beam_state b;
    b.wavelength = wavelength;
    b.wavenumber = wavenumber(wavelength);
    b.waist = waist;
    b.distance = z;
    b.rayleigh_range = pi * waist * waist / wavelength;
    const double ratio = z / b.rayleigh_range;
    b.radius = waist * std::sqrt(1.0 + ratio * ratio);
    b.curvature_radius = z > 0.0 ? z * (1.0 + 1.0 / (ratio * ratio)) : infinity;
    b.gouy_phase = std::atan(ratio);
    b.theta0 = 1.0;
    b.theta0_bar = 0.0;
    b.lambda0 = 2.0 * z / (b.wavenumber * waist * waist);
    const double l2 = b.lambda0 * b.lambda0;
    b.theta = 1.0 / (1.0 + l2);
    b.theta_bar = 1.0 - b.theta;
    b.lambda = b.lambda0 / (1.0 + l2);
    b.curvature_param = curvature_parameter(b.theta);
    return b;
}

}  // namespace hapq

#endif  // HAPQ_GEOMETRY_HPP

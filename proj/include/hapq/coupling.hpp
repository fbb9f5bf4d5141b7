#ifndef HAPQ_COUPLING_HPP
#define HAPQ_COUPLING_HPP

// Single-mode fiber coupling: diffraction-limited overlap, scintillation loss,
// annular Zernike wavefront statistics, adaptive-optics attenuation, and the
// distribution of the residual phase term.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "errors.hpp"
#include "numerics.hpp"

namespace hapq {

struct aperture_spec {
    double diameter = 0.4;           // D_Rx, m
    double obstruction_ratio = 0.3;  // alpha_obs
    double beta = 1.12;              // coupling geometry
};

enum class loop_transfer { standard, literal };

struct ao_config {
    int n_ao = 6;                    // highest corrected radial order
    double gain = 1.0;               // K_I
    double integration_time = 1e-3; // T, s
    double delay = 2e-3;             // tau, s
    int n_max = 150;                 // highest radial order in the decomposition
    loop_transfer tf = loop_transfer::standard;
};

/// Coupling geometry from fiber mode-field diameter and collimator focal length.
inline double coupling_beta(double diameter, double wavelength, double mfd, double focal_length) {
    return pi * diameter / (4.0 * wavelength) * mfd / focal_length;
}

/// Maximum coupling efficiency without turbulence.
inline double eta0_max(const aperture_spec& a) {
    const double al = a.obstruction_ratio;
    const double b = a.beta;
    if (!(al >= 0.0 && al < 1.0)) throw config_error("obstruction ratio must lie in [0, 1)");
    if (!(b > 0.0)) throw config_error("coupling beta must be positive");
    const double num = std::exp(-b * b) - std::exp(-b * b * al * al);
    const double q = num / (b * std::sqrt(1.0 - al * al));
    return 2.0 * q * q;
}

inline double eta_chi(double log_amp_var) { return std::exp(-log_amp_var); }

/// Per-mode variance <b_n^2> of annular Zernike coefficients of radial order n (rad^2).
inline double zernike_variance(int n, double diameter, double r0, double alpha) {
    if (n < 1) throw config_error("zernike_variance: radial order must be >= 1");
    if (std::isinf(r0)) return 0.0;
    if (!(r0 > 0.0)) throw config_error("zernike_variance: r0 must be positive");
    const double nn = static_cast<double>(n);
    const double a2 = alpha * alpha;
    const double lg = std::lgamma(nn - 5.0 / 6.0) - std::lgamma(17.0 / 6.0);
    const double pref = 0.023 * (nn + 1.0) * std::exp(lg) * std::pow(pi, 8.0 / 3.0) /
                        (std::pow(2.0, 5.0 / 3.0) * (1.0 - a2) * (1.0 - std::pow(alpha, 2.0 * (nn + 1.0))));
    const double first = (1.0 + std::pow(alpha, 2.0 * nn + 17.0 / 3.0)) *
                         std::exp(std::lgamma(14.0 / 3.0) - std::lgamma(17.0 / 6.0) - std::lgamma(nn + 23.0 / 6.0));
    double second = 0.0;
    if (alpha > 0.0) {
        second = 2.0 * std::exp(2.0 * (nn + 1.0) * std::log(alpha) - std::lgamma(nn + 2.0)) *
                 hyp2f1(nn - 5.0 / 6.0, -11.0 / 6.0, nn + 2.0, a2);
    }
    return pref * std::pow(diameter / r0, 5.0 / 3.0) * (first - second);
}

inline std::vector<double> zernike_variances(double diameter, double r0, double alpha, int n_max) {
    std::vector<double> out(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) out[static_cast<std::size_t>(n - 1)] = zernike_variance(n, diameter, r0, alpha);
    return out;
}

namespace detail {

// 1 - e^{-x} for complex x, accurate near zero.
inline std::complex<double> one_minus_exp(std::complex<double> x) {
    if (std::abs(x) < 1e-4) return x * (1.0 - x * (0.5 - x / 6.0));
    return 1.0 - std::exp(-x);
}

}  // namespace detail

/// |epsilon(nu)|^2 of the integrator loop at temporal frequency nu (Hz).
inline double rejection_sq(const ao_config& ao, double nu) {
    if (ao.gain == 0.0) return 1.0;
    if (ao.tf == loop_transfer::literal) {
        const double x = ao.integration_time * nu;
        const double g = ao.gain * std::exp(-ao.delay * nu) * -std::expm1(-x) / (x * x);
        const double e = 1.0 / (1.0 + g);
        return e * e;
    }
    const std::complex<double> s(0.0, 2.0 * pi * nu);
    const std::complex<double> ts = ao.integration_time * s;
    const std::complex<double> g = ao.gain * std::exp(-ao.delay * s) * detail::one_minus_exp(ts) / (ts * ts);
    return std::norm(1.0 / (1.0 + g));
}

/// AO attenuation gamma_n^2 for radial order n; 1 above the corrected range.
inline double ao_attenuation(const ao_config& ao, int n, double diameter, double wind_speed) {
    if (n > ao.n_ao) return 1.0;
    if (ao.gain < 0.0) throw config_error("AO gain K_I must be >= 0");
    if (ao.gain == 0.0) return 1.0;
    if (!(wind_speed > 0.0)) throw config_error("AO attenuation needs a positive wind speed");
    const double nc = 0.3 * (n + 1) * wind_speed / diameter;
    const double nhi = 1e3 * nc;
    const quadrature_options opt{1e-5, 1e-300, std::size_t{1} << 20};

    double low_num = 0.0;
    double low_den = 0.0;
    double level = 1.0;  // PSD value at the cut-off
    if (n == 1) {
        // nu = t^3 removes the nu^{-2/3} endpoint singularity
        const double tc = std::cbrt(nc);
        low_num = integrate([&](double t) { return 3.0 * rejection_sq(ao, t * t * t); }, 0.0, tc, opt);
        low_den = 3.0 * tc;
        level = std::pow(nc, -2.0 / 3.0);
    } else {
        low_num = integrate([&](double nu) { return rejection_sq(ao, nu); }, 0.0, nc, opt);
        low_den = nc;
    }
    const double c = level * std::pow(nc, 17.0 / 3.0);
    std::vector<double> breaks{nc};
    while (breaks.back() * 2.0 < nhi) breaks.push_back(breaks.back() * 2.0);
    breaks.push_back(nhi);
    const double high_num =
        integrate([&](double nu) { return c * std::pow(nu, -17.0 / 3.0) * rejection_sq(ao, nu); }, breaks, opt);
    const double high_den = c * 3.0 / 14.0 * (std::pow(nc, -14.0 / 3.0) - std::pow(nhi, -14.0 / 3.0));
    return (low_num + high_num) / (low_den + high_den);
}

inline std::vector<double> ao_attenuations(const ao_config& ao, double diameter, double wind_speed) {
    std::vector<double> out(static_cast<std::size_t>(ao.n_max));
    for (int n = 1; n <= ao.n_max; ++n)
        out[static_cast<std::size_t>(n - 1)] = ao_attenuation(ao, n, diameter, wind_speed);
    return out;
}

/// Modal wavefront statistics indexed by radial order n = 1..n_max.
struct zernike_spectrum {
    int n_ao = 0;
    std::vector<double> variance;  // per-mode <b_n^2>
    std::vector<double> gamma2;    // gamma_n^2

    int n_max() const { return static_cast<int>(variance.size()); }
    double multiplicity(int n) const { return n + 1.0; }
    double residual(int n) const {
        const auto i = static_cast<std::size_t>(n - 1);
        return gamma2[i] * variance[i];
    }
};

inline zernike_spectrum make_spectrum(const aperture_spec& aperture, double r0, const ao_config& ao,
                                      double wind_speed) {
    zernike_spectrum s;
    s.n_ao = ao.n_ao;
    s.variance = zernike_variances(aperture.diameter, r0, aperture.obstruction_ratio, ao.n_max);
    // no turbulence: nothing to correct, and the loop needs no wind
    if (std::isinf(r0)) s.gamma2.assign(s.variance.size(), 1.0);
    else s.gamma2 = ao_attenuations(ao, aperture.diameter, wind_speed);
    return s;
}

/// Spectrum with no AO correction at all.
inline zernike_spectrum uncorrected_spectrum(const aperture_spec& aperture, double r0, int n_max) {
    zernike_spectrum s;
    s.variance = zernike_variances(aperture.diameter, r0, aperture.obstruction_ratio, n_max);
    s.gamma2.assign(s.variance.size(), 1.0);
    return s;
}

/// Mean of eta_phi. The default multiplies every mode's factor together;
/// `split_sum` adds the corrected and uncorrected products instead.
inline double mean_eta_phi(const zernike_spectrum& s, bool split_sum = false) {
    double corrected = 0.0;
    double uncorrected = 0.0;
    for (int n = 1; n <= s.n_max(); ++n) {
        const double term = -0.5 * s.multiplicity(n) * std::log1p(2.0 * s.residual(n));
        (n <= s.n_ao ? corrected : uncorrected) += term;
    }
    if (split_sum) return std::exp(corrected) + std::exp(uncorrected);
    return std::exp(corrected + uncorrected);
}

struct rayleigh_result {
    double max_sigma = 0.0;  // largest residual coefficient std in waves
    int worst_order = 0;
    bool pass = true;
};

inline rayleigh_result rayleigh_check(const zernike_spectrum& s, double threshold = 0.05) {
    rayleigh_result r;
    for (int n = 1; n <= s.n_max(); ++n) {
        const double sj = std::sqrt(s.residual(n)) / (2.0 * pi);
        if (sj > r.max_sigma) {
            r.max_sigma = sj;
            r.worst_order = n;
        }
    }
    r.pass = r.max_sigma < threshold;
    return r;
}

/// Distribution of xi = sum_j v_j Z_j^2 (Z_j standard normal), i.e. the
/// residual phase sum, obtained by inverting its characteristic function
/// phi(u) = prod_j (1 - 2 i v_j u)^{-1/2}.
class residual_phase {
public:
    /// Terms given as (v, multiplicity) pairs; zero variances are dropped.
    residual_phase(const std::vector<double>& v, const std::vector<double>& multiplicity) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] < 0.0) throw numeric_failure("residual_phase: negative variance");
            if (v[i] > 0.0 && multiplicity[i] > 0.0) {
                v_.push_back(v[i]);
                m_.push_back(multiplicity[i]);
            }
        }
        for (std::size_t i = 0; i < v_.size(); ++i) {
            mean_ += m_[i] * v_[i];
            var_ += 2.0 * m_[i] * v_[i] * v_[i];
        }
        if (v_.empty()) return;
        build_nodes();
    }

    explicit residual_phase(const zernike_spectrum& s) : residual_phase(residuals(s), multiplicities(s)) {}

    bool degenerate() const { return v_.empty(); }
    double mean() const { return mean_; }
    double variance() const { return var_; }
    double upper() const { return mean_ + 10.0 * std::sqrt(var_); }
    std::size_t node_count() const { return nodes_.size(); }

    double pdf(double xi) const {
        if (degenerate() || xi <= 0.0) return 0.0;
        double acc = 0.0;
        for (const auto& nd : nodes_) acc += nd.w * (nd.phi * std::polar(1.0, -xi * nd.u)).real();
        acc += extension(xi, false);
        return std::max(0.0, acc / pi);
    }

    double cdf(double xi) const {
        if (degenerate()) return xi >= 0.0 ? 1.0 : 0.0;
        if (xi <= 0.0) return 0.0;
        double acc = 0.0;
        for (const auto& nd : nodes_) acc += nd.w * (nd.phi * std::polar(1.0, -xi * nd.u)).imag() / nd.u;
        acc += extension(xi, true);
        return std::clamp(0.5 - acc / pi, 0.0, 1.0);
    }

    /// Tabulate P_xi on `cells` midpoints of [0, upper()] and check that it
    /// integrates to the CDF increment within 1e-2.
    struct table {
        std::vector<double> xi;
        std::vector<double> pdf;
        double integral = 0.0;
        double cdf_upper = 0.0;
    };

    table tabulate(std::size_t cells = default_grid_cells) const {
        table t;
        if (degenerate()) return t;
        const double hi = upper();
        const double h = hi / static_cast<double>(cells);
        t.xi.resize(cells);
        t.pdf.resize(cells);
        double inner = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            t.xi[i] = h * (static_cast<double>(i) + 0.5);
            t.pdf[i] = pdf(t.xi[i]);
            if (i > 0) inner += t.pdf[i] * h;
        }
        t.cdf_upper = cdf(hi);
        const double first = cdf(h);
        t.integral = inner + first;
        if (!(t.cdf_upper >= 0.99 && t.cdf_upper <= 1.01))
            throw numeric_failure("residual phase CDF at the grid end is " + std::to_string(t.cdf_upper));
        if (std::abs(inner - (t.cdf_upper - first)) > 1e-2)
            throw numeric_failure("residual phase pdf integrates to " + std::to_string(t.integral));
        return t;
    }

private:
    struct node {
        double u;
        double w;
        std::complex<double> phi;
    };

    static std::vector<double> residuals(const zernike_spectrum& s) {
        std::vector<double> out;
        for (int n = 1; n <= s.n_max(); ++n) out.push_back(s.residual(n));
        return out;
    }
    static std::vector<double> multiplicities(const zernike_spectrum& s) {
        std::vector<double> out;
        for (int n = 1; n <= s.n_max(); ++n) out.push_back(s.multiplicity(n));
        return out;
    }

    // -ln|phi(u)|
    double log_decay(double u) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) acc += 0.25 * m_[i] * std::log1p(4.0 * v_[i] * v_[i] * u * u);
        return acc;
    }

    std::complex<double> phi(double u) const {
        std::complex<double> acc = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i)
            acc -= 0.5 * m_[i] * std::log(std::complex<double>(1.0, -2.0 * v_[i] * u));
        return std::exp(acc);
    }

    // phi'/phi and its derivative
    std::pair<std::complex<double>, std::complex<double>> log_derivs(double u) const {
        std::complex<double> s1 = 0.0;
        std::complex<double> s2 = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const std::complex<double> d(1.0, -2.0 * v_[i] * u);
            s1 += m_[i] * std::complex<double>(0.0, v_[i]) / d;
            s2 += -2.0 * m_[i] * v_[i] * v_[i] / (d * d);
        }
        return {s1, s2};
    }

    double phase_rate(double u) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) acc += m_[i] * v_[i] / (1.0 + 4.0 * v_[i] * v_[i] * u * u);
        return acc;
    }

    void build_nodes() {
        const double sigma = std::sqrt(var_);
        const double target = 12.0 * std::log(10.0);  // |phi| <= 1e-12
        const double cap = 200.0 / sigma;
        double u = 1.0 / sigma;
        while (log_decay(u) < target && u < cap) u *= 2.0;
        if (log_decay(u) >= target) {
            double a = u * 0.5;
            double b = u;
            for (int it = 0; it < 60; ++it) {
                const double c = 0.5 * (a + b);
                (log_decay(c) >= target ? b : a) = c;
            }
            cut_ = b;
            open_tail_ = false;
        } else {
            cut_ = cap;
            open_tail_ = true;
        }
        const double omega = upper();
        append_panels(0.0, cut_, 2.0 * pi / omega, nodes_);
    }

    void append_panels(double a, double b, double width, std::vector<node>& out) const {
        const auto panels = static_cast<std::size_t>(std::ceil((b - a) / width));
        if (panels == 0) return;
        if (panels > 2'000'000) throw numeric_failure("residual_phase: characteristic function needs too many panels");
        const double h = (b - a) / static_cast<double>(panels);
        const auto ref = gauss_legendre(16, 0.0, 1.0);
        out.reserve(out.size() + panels * 16);
        for (std::size_t p = 0; p < panels; ++p) {
            const double lo = a + h * static_cast<double>(p);
            for (std::size_t k = 0; k < 16; ++k) {
                const double uu = lo + h * ref.nodes[k];
                out.push_back({uu, h * ref.weights[k], phi(uu)});
            }
        }
    }

    // Contribution of u beyond the shared node set: explicit panels out to
    // 40/xi and a three-term integration-by-parts remainder after that.
    double extension(double xi, bool cdf_mode) const {
        if (!open_tail_) return 0.0;
        double acc = 0.0;
        double end = cut_;
        const double want = 40.0 / xi;
        if (want > cut_) {
            std::vector<node> extra;
            append_panels(cut_, want, 2.0 * pi / (xi + phase_rate(cut_)), extra);
            for (const auto& nd : extra) {
                const auto val = nd.phi * std::polar(1.0, -xi * nd.u);
                acc += nd.w * (cdf_mode ? val.imag() / nd.u : val.real());
            }
            end = want;
        }
        const std::complex<double> f = phi(end);
        const auto [s1, s2] = log_derivs(end);
        const std::complex<double> f1 = f * s1;
        const std::complex<double> f2 = f * (s1 * s1 + s2);
        std::complex<double> g = f, g1 = f1, g2 = f2;
        if (cdf_mode) {
            g = f / end;
            g1 = f1 / end - f / (end * end);
            g2 = f2 / end - 2.0 * f1 / (end * end) + 2.0 * f / (end * end * end);
        }
        const std::complex<double> ix(0.0, xi);
        const std::complex<double> tail = std::polar(1.0, -xi * end) * (g / ix + g1 / (ix * ix) + g2 / (ix * ix * ix));
        acc += cdf_mode ? tail.imag() : tail.real();
        return acc;
    }

    std::vector<double> v_;
    std::vector<double> m_;
    double mean_ = 0.0;
    double var_ = 0.0;
    double cut_ = 0.0;
    bool open_tail_ = false;
    std::vector<node> nodes_;
};

/// Distribution of eta_SMF = eta_max * exp(-xi) on (0, eta_max].
inline efficiency_distribution smf_pdf(double eta_max, const residual_phase& xi, std::size_t cells = default_grid_cells) {
    if (xi.degenerate()) return efficiency_distribution::point_mass(eta_max);
    if (!(eta_max > 0.0)) return efficiency_distribution::point_mass(0.0);
    const double top = xi.upper();
    // CDF of eta at each edge is 1 - F_xi(ln(eta_max / edge)).
    std::vector<double> f_xi(cells + 1, 0.0);
    double prev_xi = -1.0;
    double prev_f = 0.0;
    for (std::size_t k = cells + 1; k-- > 0;) {
        if (k == 0) {
            f_xi[k] = xi.cdf(top);
            break;
        }
        const double x = std::log(static_cast<double>(cells) / static_cast<double>(k));
        if (x >= top) {
            f_xi[k] = xi.cdf(top);
            continue;
        }
        if (x != prev_xi) {
            prev_f = xi.cdf(x);
            prev_xi = x;
        }
        f_xi[k] = prev_f;
    }
    std::vector<double> masses(cells);
    for (std::size_t k = 0; k < cells; ++k) masses[k] = std::max(0.0, f_xi[k] - f_xi[k + 1]);
    // Gil-Pelaez values carry ~1e-12 noise; the running maximum keeps the CDF monotone.
    return efficiency_distribution::from_masses(0.0, eta_max, std::move(masses));
}

}  // namespace hapq

#endif  // HAPQ_COUPLING_HPP

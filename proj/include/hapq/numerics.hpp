#ifndef HAPQ_NUMERICS_HPP
#define HAPQ_NUMERICS_HPP

// Quadrature and special functions shared by the channel models.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace hapq {

inline constexpr double pi = std::numbers::pi;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct quadrature_options {
    double rtol = 1e-6;
    double atol = 1e-30;
    std::size_t max_evaluations = std::size_t{1} << 20;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> gk15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct gk_segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const gk_segment& other) const { return error < other.error; }
};

template <class F>
gk_segment gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = fc * gk15_wk[7];
    double gauss = fc * gk15_wg[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * gk15_x[static_cast<std::size_t>(i)];
        const double fsum = f(c - dx) + f(c + dx);
        kronrod += gk15_wk[static_cast<std::size_t>(i)] * fsum;
        if (i % 2 == 1) gauss += gk15_wg[static_cast<std::size_t>(i / 2)] * fsum;
    }
    return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over the pieces
/// delimited by `breaks` (sorted, at least two entries). Throws
/// quadrature_failure when max(atol, rtol*|I|) is not met within the budget.
template <class F>
double integrate(F&& f, const std::vector<double>& breaks, const quadrature_options& opt = {}) {
    if (breaks.size() < 2) return 0.0;
    std::priority_queue<detail::gk_segment> heap;
    double total = 0.0;
    double total_error = 0.0;
    std::size_t evaluations = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] <= breaks[i]) continue;
        auto s = detail::gk15(f, breaks[i], breaks[i + 1]);
        evaluations += 15;
        total += s.value;
        total_error += s.error;
        heap.push(s);
    }
    while (!heap.empty() && total_error > std::max(opt.atol, opt.rtol * std::abs(total))) {
        if (evaluations + 30 > opt.max_evaluations) {
            throw quadrature_failure("adaptive quadrature: tolerance not met after " +
                                     std::to_string(evaluations) + " evaluations (error estimate " +
                                     std::to_string(total_error) + ")");
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    return total;
}

template <class F>
double integrate(F&& f, double a, double b, const quadrature_options& opt = {}) {
    return integrate(std::forward<F>(f), std::vector<double>{a, b}, opt);
}

/// Gauss-Legendre rule with n nodes mapped onto [a, b].
struct gauss_legendre_rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline gauss_legendre_rule gauss_legendre(std::size_t n, double a, double b) {
    gauss_legendre_rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

/// Standard normal cumulative distribution.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// e^{-x} I_n(x) for n in {0, 1}, x >= 0. Uses the large-argument expansion
/// past x = 700 where I_n itself overflows.
inline double scaled_bessel_i(int n, double x) {
    if (x < 0.0) throw std::domain_error("scaled_bessel_i: negative argument");
    if (x <= 700.0) return std::cyl_bessel_i(static_cast<double>(n), x) * std::exp(-x);
    const double mu = 4.0 * n * n;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 12; ++k) {
        term *= -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
        sum += term;
        if (std::abs(term) < 1e-17) break;
    }
    return sum / std::sqrt(2.0 * pi * x);
}

/// Gaussian hypergeometric 2F1(a, b; c; x) by its power series, |x| < 1.
inline double hyp2f1(double a, double b, double c, double x, double term_tol = 1e-12) {
    if (!(std::abs(x) < 1.0)) throw numeric_failure("hyp2f1: series requires |x| < 1");
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < 100000; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
        sum += term;
        if (std::abs(term) <= term_tol * std::abs(sum)) return sum;
    }
    throw numeric_failure("hyp2f1: series did not converge");
}

/// n evenly spaced points covering [a, b].
inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

}  // namespace hapq

#endif  // HAPQ_NUMERICS_HPP

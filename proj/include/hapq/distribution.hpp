#ifndef HAPQ_DISTRIBUTION_HPP
#define HAPQ_DISTRIBUTION_HPP

// Tabulated distribution over an efficiency in [0, 1].
//
// The support [lo, hi] is split into N equal cells. Each cell carries its
// probability mass, and inside a cell the density is flat, so the CDF is
// piecewise linear between the edges. Moments are the exact moments of that
// piecewise-flat density, which is also what sample() draws from. A single
// atom (point mass) is represented separately.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace hapq {

inline constexpr std::size_t default_grid_cells = 2048;

class efficiency_distribution {
public:
    efficiency_distribution() = default;

    /// Distribution from raw cell masses on [lo, hi]. Masses are renormalized;
    /// the pre-normalization total is kept in raw_mass(). Throws numeric_failure
    /// when |raw - 1| exceeds `drift_limit`.
    static efficiency_distribution from_masses(double lo, double hi, std::vector<double> masses,
                                               double drift_limit = 1e-2) {
        if (masses.empty()) throw numeric_failure("distribution: empty grid");
        if (!(hi > lo)) throw numeric_failure("distribution: degenerate support");
        efficiency_distribution d;
        d.lo_ = lo;
        d.hi_ = hi;
        double total = 0.0;
        for (double& m : masses) {
            if (!(m >= 0.0)) {
                // tiny negative values come from cancellation in CDF differences
                if (m > -1e-12) m = 0.0;
                else throw numeric_failure("distribution: negative cell mass " + std::to_string(m));
            }
            total += m;
        }
        d.raw_mass_ = total;
        if (!(std::abs(total - 1.0) <= drift_limit))
            throw numeric_failure("distribution: total mass " + std::to_string(total) +
                                  " drifts from 1 by more than " + std::to_string(drift_limit));
        for (double& m : masses) m /= total;
        d.mass_ = std::move(masses);
        d.finish();
        return d;
    }

    /// All probability at a single efficiency value.
    static efficiency_distribution point_mass(double value) {
        efficiency_distribution d;
        d.atom_ = value;
        d.lo_ = value;
        d.hi_ = value;
        d.raw_mass_ = 1.0;
        d.mean_ = value;
        d.second_ = value * value;
        return d;
    }

    /// Distribution of factor * eta, factor in (0, 1].
    efficiency_distribution scaled(double factor) const {
        if (!(factor >= 0.0)) throw numeric_failure("distribution: negative scale factor");
        if (atom_ || factor == 0.0) return point_mass((atom_ ? *atom_ : 0.0) * factor);
        efficiency_distribution d = *this;
        d.lo_ *= factor;
        d.hi_ *= factor;
        d.mean_ *= factor;
        d.second_ *= factor * factor;
        return d;
    }

    bool is_point_mass() const { return atom_.has_value(); }
    std::size_t cells() const { return mass_.size(); }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double width() const { return mass_.empty() ? 0.0 : (hi_ - lo_) / static_cast<double>(mass_.size()); }
    double raw_mass() const { return raw_mass_; }
    double mean() const { return mean_; }
    double second_moment() const { return second_; }
    double variance() const { return std::max(0.0, second_ - mean_ * mean_); }

    double edge(std::size_t i) const { return lo_ + width() * static_cast<double>(i); }
    double center(std::size_t i) const { return lo_ + width() * (static_cast<double>(i) + 0.5); }
    double mass(std::size_t i) const { return mass_[i]; }
    double pdf_value(std::size_t i) const { return mass_[i] / width(); }
    double cdf_value(std::size_t i) const { return cdf_[i]; }  // at edge(i), i in [0, cells()]

    double cdf(double x) const {
        if (atom_) return x >= *atom_ ? 1.0 : 0.0;
        if (x <= lo_) return 0.0;
        if (x >= hi_) return 1.0;
        const double pos = (x - lo_) / width();
        const std::size_t i = std::min(static_cast<std::size_t>(pos), mass_.size() - 1);
        return cdf_[i] + mass_[i] * (pos - static_cast<double>(i));
    }

    double pdf(double x) const {
        if (atom_) return x == *atom_ ? std::numeric_limits<double>::infinity() : 0.0;
        if (x < lo_ || x > hi_) return 0.0;
        const std::size_t i = std::min(static_cast<std::size_t>((x - lo_) / width()), mass_.size() - 1);
        return pdf_value(i);
    }

    /// Inverse CDF. u = 0 maps to the lower end of the support, u -> 1 to its upper end.
    double sample(double u) const {
        if (atom_) return *atom_;
        u = std::clamp(u, 0.0, 1.0);
        if (u <= 0.0) return lo_ + width() * static_cast<double>(first_);
        if (u >= 1.0) return lo_ + width() * static_cast<double>(last_ + 1);
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = static_cast<std::size_t>(std::distance(cdf_.begin(), it));
        i = std::clamp<std::size_t>(i, 1, mass_.size()) - 1;
        const double m = mass_[i];
        const double frac = m > 0.0 ? (u - cdf_[i]) / m : 0.0;
        return edge(i) + width() * std::clamp(frac, 0.0, 1.0);
    }

    /// Lowest and highest efficiency carrying probability.
    double support_min() const { return atom_ ? *atom_ : edge(first_); }
    double support_max() const { return atom_ ? *atom_ : edge(last_ + 1); }

    void write_csv(std::ostream& out) const {
        out << "eta,pdf,cdf\n";
        if (atom_) {
            out << *atom_ << ",inf,1\n";
            return;
        }
        for (std::size_t i = 0; i < mass_.size(); ++i)
            out << center(i) << ',' << pdf_value(i) << ',' << 0.5 * (cdf_[i] + cdf_[i + 1]) << '\n';
    }

private:
    void finish() {
        const std::size_t n = mass_.size();
        cdf_.assign(n + 1, 0.0);
        double acc = 0.0;
        mean_ = 0.0;
        second_ = 0.0;
        const double w = width();
        for (std::size_t i = 0; i < n; ++i) {
            acc += mass_[i];
            cdf_[i + 1] = std::min(acc, 1.0);  // rounding can push the running sum past 1
            const double c = center(i);
            mean_ += mass_[i] * c;
            second_ += mass_[i] * (c * c + w * w / 12.0);
        }
        cdf_[n] = 1.0;
        first_ = 0;
        while (first_ + 1 < n && mass_[first_] == 0.0) ++first_;
        last_ = n - 1;
        while (last_ > 0 && mass_[last_] == 0.0) --last_;
    }

    double lo_ = 0.0;
    double hi_ = 0.0;
    std::vector<double> mass_;
    std::vector<double> cdf_;
    std::optional<double> atom_;
    double raw_mass_ = 1.0;
    double mean_ = 0.0;
    double second_ = 0.0;
    std::size_t first_ = 0;
    std::size_t last_ = 0;
};

}  // namespace hapq

#endif  // HAPQ_DISTRIBUTION_HPP

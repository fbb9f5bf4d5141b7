#ifndef HAPQ_TRANSMITTANCE_HPP
#define HAPQ_TRANSMITTANCE_HPP

// Atmospheric transmittance providers: a constant value, or a table generated
// offline by a radiative-transfer code and interpolated multilinearly.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace hapq {

class transmittance_provider {
public:
    virtual ~transmittance_provider() = default;
    /// Transmittance for a path seen at zenith angle (degrees) between h0 and H (m).
    virtual double operator()(double zenith_deg, double h0, double H) const = 0;
    /// Non-empty when the query falls outside the data and will be clamped.
    virtual std::string hull_warning(double, double, double) const { return {}; }
    virtual std::string describe() const = 0;
};

class constant_transmittance final : public transmittance_provider {
public:
    explicit constant_transmittance(double value) : value_(value) {
        if (!(value >= 0.0 && value <= 1.0))
            throw config_error("constant transmittance must lie in [0, 1], got " + std::to_string(value));
    }
    double operator()(double, double, double) const override { return value_; }
    std::string describe() const override { return "constant:" + std::to_string(value_); }
    double value() const { return value_; }

private:
    double value_;
};

inline std::shared_ptr<const transmittance_provider> constant_provider(double value) {
    return std::make_shared<constant_transmittance>(value);
}

struct transmittance_row {
    double zenith_deg;
    double ground_alt;
    double platform_alt;
    double value;
};

/// Tabulated transmittance on a full tensor grid over (zenith, h0, H).
class transmittance_table final : public transmittance_provider {
public:
    transmittance_table(std::vector<transmittance_row> rows, double wavelength, std::string source)
        : wavelength_(wavelength), source_(std::move(source)), rows_(std::move(rows)) {
        build();
    }

    double operator()(double zenith_deg, double h0, double H) const override {
        const double q[3] = {zenith_deg, h0, H};
        std::size_t lo[3];
        double t[3];
        for (int d = 0; d < 3; ++d) {
            const auto& ax = axes_[d];
            double x = q[d];
            x = std::clamp(x, ax.front(), ax.back());
            if (ax.size() == 1) {
                lo[d] = 0;
                t[d] = 0.0;
                continue;
            }
            auto it = std::upper_bound(ax.begin(), ax.end(), x);
            std::size_t i = static_cast<std::size_t>(std::distance(ax.begin(), it));
            i = std::clamp<std::size_t>(i, 1, ax.size() - 1) - 1;
            lo[d] = i;
            t[d] = (x - ax[i]) / (ax[i + 1] - ax[i]);
        }
        double acc = 0.0;
        for (int corner = 0; corner < 8; ++corner) {
            double w = 1.0;
            std::size_t idx[3];
            for (int d = 0; d < 3; ++d) {
                const bool up = (corner >> d) & 1;
                if (up && axes_[d].size() == 1) {
                    w = 0.0;
                    break;
                }
                idx[d] = lo[d] + (up ? 1 : 0);
                w *= up ? t[d] : 1.0 - t[d];
            }
            if (w == 0.0) continue;
            acc += w * at(idx[0], idx[1], idx[2]);
        }
        return acc;
    }

    std::string hull_warning(double zenith_deg, double h0, double H) const override {
        const double q[3] = {zenith_deg, h0, H};
        std::string msg;
        for (int d = 0; d < 3; ++d) {
            if (q[d] < axes_[d].front() || q[d] > axes_[d].back()) {
                if (!msg.empty()) msg += "; ";
                msg += std::string(axis_name(d)) + "=" + std::to_string(q[d]) + " outside table range, clamped";
            }
        }
        return msg.empty() ? msg : "transmittance: " + msg;
    }
    std::string describe() const override { return "table:" + source_; }

    double wavelength() const { return wavelength_; }
    const std::string& source() const { return source_; }
    const std::vector<transmittance_row>& rows() const { return rows_; }

private:
    void build() {
        if (rows_.empty()) throw parse_error("transmittance table has no data rows");
        for (const auto& r : rows_) {
            if (!(r.value >= 0.0 && r.value <= 1.0))
                throw invariant_violation("transmittance value " + std::to_string(r.value) +
                                          " outside [0, 1]");
        }
        // Each axis must appear in increasing order; row order is otherwise free.
        std::vector<double> seen[3];
        for (const auto& r : rows_) {
            const double v[3] = {r.zenith_deg, r.ground_alt, r.platform_alt};
            for (int d = 0; d < 3; ++d) {
                if (std::find(seen[d].begin(), seen[d].end(), v[d]) == seen[d].end()) seen[d].push_back(v[d]);
            }
        }
        for (int d = 0; d < 3; ++d) {
            if (!std::is_sorted(seen[d].begin(), seen[d].end()))
                throw invariant_violation("transmittance table axis " + std::string(axis_name(d)) +
                                          " is not sorted");
            axes_[d] = seen[d];
        }
        const std::size_t n = axes_[0].size() * axes_[1].size() * axes_[2].size();
        if (n != rows_.size())
            throw invariant_violation("transmittance table is not a full grid: expected " + std::to_string(n) +
                                      " rows, found " + std::to_string(rows_.size()));
        values_.assign(n, -1.0);
        for (const auto& r : rows_) {
            const std::size_t i = index_of(0, r.zenith_deg);
            const std::size_t j = index_of(1, r.ground_alt);
            const std::size_t k = index_of(2, r.platform_alt);
            double& slot = values_[(i * axes_[1].size() + j) * axes_[2].size() + k];
            if (slot >= 0.0) throw invariant_violation("transmittance table has a duplicated grid point");
            slot = r.value;
        }
        for (std::size_t j = 0; j < axes_[1].size(); ++j) {
            for (std::size_t k = 0; k < axes_[2].size(); ++k) {
                for (std::size_t i = 1; i < axes_[0].size(); ++i) {
                    if (at(i, j, k) > at(i - 1, j, k))
                        throw invariant_violation("transmittance increases with zenith angle at zenith " +
                                                  std::to_string(axes_[0][i]) + " deg");
                }
            }
        }
    }

    static const char* axis_name(int d) { return d == 0 ? "zenith_deg" : d == 1 ? "ground_alt_m" : "platform_alt_m"; }

    std::size_t index_of(int d, double v) const {
        return static_cast<std::size_t>(
            std::distance(axes_[d].begin(), std::lower_bound(axes_[d].begin(), axes_[d].end(), v)));
    }

    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return values_[(i * axes_[1].size() + j) * axes_[2].size() + k];
    }

    double wavelength_;
    std::string source_;
    std::vector<transmittance_row> rows_;
    std::vector<double> axes_[3];
    std::vector<double> values_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& field, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (trim(field.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw parse_error("cannot parse number '" + field + "'", line);
}

}  // namespace detail

/// Parse a transmittance CSV from a stream. Header
/// `zenith_deg,ground_alt_m,platform_alt_m,transmittance`, `#` comments, and an
/// optional `# lambda_nm=<value>` comment.
inline transmittance_table parse_table(std::istream& in, const std::string& source = "<stream>") {
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    double lambda_nm = 1550.0;
    std::vector<transmittance_row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const auto pos = t.find("lambda_nm=");
            if (pos != std::string::npos) lambda_nm = detail::parse_number(t.substr(pos + 10), lineno);
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(t);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(detail::trim(f));
        if (!header_seen) {
            const std::vector<std::string> expected{"zenith_deg", "ground_alt_m", "platform_alt_m", "transmittance"};
            if (fields != expected)
                throw parse_error("expected header zenith_deg,ground_alt_m,platform_alt_m,transmittance", lineno);
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) throw parse_error("expected 4 fields, found " + std::to_string(fields.size()), lineno);
        rows.push_back({detail::parse_number(fields[0], lineno), detail::parse_number(fields[1], lineno),
                        detail::parse_number(fields[2], lineno), detail::parse_number(fields[3], lineno)});
    }
    if (!header_seen) throw parse_error("empty transmittance table (no header)", lineno);
    if (rows.empty()) throw parse_error("transmittance table has no data rows", lineno);
    return transmittance_table(std::move(rows), lambda_nm * 1e-9, source);
}

inline transmittance_table load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open transmittance table '" + path + "'");
    return parse_table(in, path);
}

}  // namespace hapq

#endif  // HAPQ_TRANSMITTANCE_HPP

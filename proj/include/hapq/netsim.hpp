#ifndef HAPQ_NETSIM_HPP
#define HAPQ_NETSIM_HPP

// Network topology and Monte Carlo protocol runs: BB84 per link with trusted
// relays, entanglement distribution from a middle node, and MDI rounds with a
// Bell-state measurement at the middle node.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "channel.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace hapq {

inline double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw config_error("binary_entropy: p must lie in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Fraction of the raw key that survives privacy amplification, clamped at 0.
inline double secret_fraction(double qber_x, double qber_z) {
    return std::max(0.0, 1.0 - binary_entropy(qber_x) - binary_entropy(qber_z));
}

inline double skr(double raw_rate, double qber_x, double qber_z) { return raw_rate * secret_fraction(qber_x, qber_z); }

struct protocol_params {
    double source_rate = 80e6;  // Hz
    double mu = 0.01;
    double qber_x = 0.04;
    double qber_z = 0.04;
    double p_bsm = 0.03125;

    void validate() const {
        if (!(source_rate > 0.0)) throw config_error("source_rate_hz must be > 0");
        if (!(mu > 0.0 && mu <= 1.0)) throw config_error("mu must lie in (0, 1]");
        if (!(qber_x >= 0.0 && qber_x < 0.5) || !(qber_z >= 0.0 && qber_z < 0.5))
            throw config_error("qber_x and qber_z must lie in [0, 0.5)");
        if (!(p_bsm >= 0.0 && p_bsm <= 1.0)) throw config_error("p_bsm must lie in [0, 1]");
    }
};

/// Bell-state measurement success with two detectors of efficiency p_det.
inline double bsm_success(double p_det) { return 0.5 * p_det * p_det; }

struct sim_result {
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    double mean_eff = 0.0;
    double stderr_eff = 0.0;
    double analytic_mean = 0.0;
    double raw_rate = 0.0;
    double raw_rate_err = 0.0;
    double skr = 0.0;
    double skr_err = 0.0;
    std::vector<std::string> warnings;
};

namespace detail {

inline sim_result finish_result(std::uint64_t sent, std::uint64_t received, double analytic, double rate_scale,
                                const protocol_params& pp) {
    sim_result r;
    r.sent = sent;
    r.received = received;
    r.analytic_mean = analytic;
    if (sent > 0) {
        const double p = static_cast<double>(received) / static_cast<double>(sent);
        r.mean_eff = p;
        r.stderr_eff = std::sqrt(p * (1.0 - p) / static_cast<double>(sent));
    }
    r.raw_rate = rate_scale * r.mean_eff;
    r.raw_rate_err = rate_scale * r.stderr_eff;
    const double f = secret_fraction(pp.qber_x, pp.qber_z);
    r.skr = r.raw_rate * f;
    r.skr_err = r.raw_rate_err * f;
    return r;
}

inline bool pass_path(const std::vector<const channel_model*>& path, chunk_rng& rng) {
    bool ok = true;
    for (const auto* ch : path) {
        // always draw three uniforms so later channels see the same stream
        const double a = rng.uniform();
        const double b = rng.uniform();
        const double c = rng.uniform();
        ok = sample_transmission(*ch, a, b, c) && ok;
    }
    return ok;
}

inline double path_mean(const std::vector<const channel_model*>& path) {
    double m = 1.0;
    for (const auto* ch : path) m *= ch->mean_efficiency;
    return m;
}

inline void low_count_warning(sim_result& r, const char* what) {
    if (r.received < 100)
        r.warnings.push_back(std::string("insufficient statistics: only ") + std::to_string(r.received) + " " +
                             what);
}

}  // namespace detail

struct run_options {
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    unsigned workers = 1;
};

/// BB84 over a single link: each photon passes the channel or is lost.
inline sim_result run_bb84(const channel_model& link, std::uint64_t n_photons, const protocol_params& pp,
                           const run_options& opt = {}) {
    pp.validate();
    const std::vector<const channel_model*> path{&link};
    const auto hits = count_successes(n_photons, opt.seed, opt.stream, opt.workers,
                                      [&](chunk_rng& rng) { return detail::pass_path(path, rng); });
    auto r = detail::finish_result(n_photons, hits, link.mean_efficiency, pp.source_rate * pp.mu, pp);
    if (n_photons < 10'000) r.warnings.push_back("fewer than 1e4 photons: error bars are unreliable");
    return r;
}

/// End-to-end key rate of a trusted-relay chain: the slowest hop.
inline double trusted_node_rate(const std::vector<sim_result>& hops) {
    if (hops.empty()) throw config_error("trusted_node_rate: no sublinks");
    double m = std::numeric_limits<double>::infinity();
    for (const auto& h : hops) m = std::min(m, h.skr);
    return m;
}

/// Entanglement distribution: a pair counts when photon A traverses every
/// channel of path_a and photon B every channel of path_b.
inline sim_result run_entanglement(const std::vector<const channel_model*>& path_a,
                                   const std::vector<const channel_model*>& path_b, std::uint64_t n_pairs,
                                   const protocol_params& pp, const run_options& opt = {}) {
    pp.validate();
    const auto hits = count_successes(n_pairs, opt.seed, opt.stream, opt.workers, [&](chunk_rng& rng) {
        const bool a = detail::pass_path(path_a, rng);
        const bool b = detail::pass_path(path_b, rng);
        return a && b;
    });
    const double analytic = detail::path_mean(path_a) * detail::path_mean(path_b);
    auto r = detail::finish_result(n_pairs, hits, analytic, pp.source_rate * pp.mu, pp);
    detail::low_count_warning(r, "coincidences");
    return r;
}

/// MDI rounds: both photons reach the middle node and the BSM succeeds.
/// Both parties emit each round, so the rate scales with mu^2.
inline sim_result run_mdi(const std::vector<const channel_model*>& path_a, const std::vector<const channel_model*>& path_b,
                          double p_bsm, std::uint64_t n_rounds, const protocol_params& pp, const run_options& opt = {}) {
    pp.validate();
    if (!(p_bsm >= 0.0 && p_bsm <= 1.0)) throw config_error("p_bsm must lie in [0, 1]");
    const auto hits = count_successes(n_rounds, opt.seed, opt.stream, opt.workers, [&](chunk_rng& rng) {
        const bool a = detail::pass_path(path_a, rng);
        const bool b = detail::pass_path(path_b, rng);
        const bool bsm = rng.uniform() < p_bsm;
        return a && b && bsm;
    });
    const double analytic = detail::path_mean(path_a) * detail::path_mean(path_b) * p_bsm;
    auto r = detail::finish_result(n_rounds, hits, analytic, pp.source_rate * pp.mu * pp.mu, pp);
    detail::low_count_warning(r, "successful rounds");
    return r;
}

/// Pool of independent repeats into one result (counts add up).
inline sim_result merge_results(const std::vector<sim_result>& runs, const protocol_params& pp, double rate_scale) {
    if (runs.empty()) throw config_error("merge_results: nothing to merge");
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    for (const auto& r : runs) {
        sent += r.sent;
        received += r.received;
    }
    auto out = detail::finish_result(sent, received, runs.front().analytic_mean, rate_scale, pp);
    for (const auto& r : runs)
        for (const auto& w : r.warnings)
            if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
    return out;
}

// ---------------------------------------------------------------- topology

enum class node_kind { qonnector, qlient, balloon };

inline const char* to_string(node_kind k) {
    switch (k) {
        case node_kind::qonnector: return "qonnector";
        case node_kind::qlient: return "qlient";
        case node_kind::balloon: return "balloon";
    }
    return "?";
}

inline bool is_ground(node_kind k) { return k != node_kind::balloon; }

struct network_node {
    std::string id;
    node_kind kind = node_kind::qonnector;
    double position_km = 0.0;  // along the great circle through the network
    double altitude_m = 0.0;
};

struct network_link {
    std::string from;
    std::string to;
    bool fiber = false;
    double length_km = -1.0;  // fiber only; negative means the ground distance
};

struct network_spec {
    std::vector<network_node> nodes;
    std::vector<network_link> links;

    const network_node& node(const std::string& id) const {
        for (const auto& n : nodes)
            if (n.id == id) return n;
        throw config_error("unknown node '" + id + "'");
    }

    /// Link joining a and b in either direction.
    const network_link& link(const std::string& a, const std::string& b) const {
        for (const auto& l : links)
            if ((l.from == a && l.to == b) || (l.from == b && l.to == a)) return l;
        throw config_error("no link between '" + a + "' and '" + b + "'");
    }

    void validate() const {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = i + 1; j < nodes.size(); ++j)
                if (nodes[i].id == nodes[j].id) throw config_error("duplicate node id '" + nodes[i].id + "'");
            const auto& n = nodes[i];
            if (n.kind == node_kind::balloon && !(n.altitude_m > 0.0))
                throw config_error("balloon '" + n.id + "' needs a positive altitude");
            if (n.altitude_m < 0.0) throw config_error("node '" + n.id + "' has negative altitude");
        }
        for (const auto& l : links) {
            const auto& a = node(l.from);
            const auto& b = node(l.to);
            if (l.fiber && !(is_ground(a.kind) && is_ground(b.kind)))
                throw config_error("fiber link " + l.from + "-" + l.to + " must join two ground nodes");
            if (!l.fiber && is_ground(a.kind) && is_ground(b.kind))
                throw config_error("free-space link " + l.from + "-" + l.to + " needs a balloon endpoint");
        }
    }

    /// Consecutive links along a node route; throws if a hop is missing.
    void check_route(const std::vector<std::string>& route) const {
        if (route.size() < 2) throw config_error("a route needs at least two nodes");
        for (std::size_t i = 0; i + 1 < route.size(); ++i) (void)link(route[i], route[i + 1]);
    }
};

/// Channel kind for traffic flowing from `a` to `b`.
inline link_kind hop_kind(const network_node& a, const network_node& b, const network_link& l) {
    if (l.fiber) return link_kind::fiber;
    if (!is_ground(a.kind) && !is_ground(b.kind)) return link_kind::horizontal;
    return is_ground(a.kind) ? link_kind::uplink : link_kind::downlink;
}

}  // namespace hapq

#endif  // HAPQ_NETSIM_HPP

#ifndef HAPQ_SCENARIO_HPP
#define HAPQ_SCENARIO_HPP

// Scenario execution: channels for every hop of a network, protocol runs,
// CSV emission and parameter sweeps.

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "netsim.hpp"
#include "rng.hpp"

namespace hapq {

/// Where the photon of a hop is detected, which decides whether the
/// receiver's detector efficiency belongs to the channel.
enum class detection { at_receiver, none };

inline double detector_efficiency(const physics_params& p, const network_node& n) {
    return n.kind == node_kind::balloon ? p.p_det_balloon : p.p_det_ground;
}

inline link_params base_link_params(const physics_params& p) {
    link_params lp;
    lp.wavelength = p.wavelength_nm * 1e-9;
    lp.aperture.obstruction_ratio = p.obstruction_ratio;
    lp.aperture.beta = p.coupling_beta;
    lp.ao.n_ao = p.n_ao;
    lp.ao.n_max = p.n_max;
    lp.ao.gain = p.K_I;
    lp.ao.delay = p.ao_delay_s;
    lp.ao.integration_time = p.ao_integration_s;
    lp.ao.tf = p.loop_tf;
    lp.pointing = {p.theta_pe, p.tracking_eff};
    lp.profile.cn2_ground = p.cn2_ground;
    lp.profile.wind_speed = p.wind_speed;
    lp.logamp = p.logamp;
    lp.split_eta_phi = p.eta_phi_split;
    return lp;
}

/// Separation along the surface between two nodes, km.
inline double ground_distance_km(const network_node& a, const network_node& b) {
    return std::abs(a.position_km - b.position_km);
}

/// Channel for one hop of the network, transmitted from `from` to `to`.
inline channel_model build_hop(const physics_params& p, const network_spec& net, const std::string& from,
                               const std::string& to, detection det, const transmittance_provider& atm) {
    const auto& a = net.node(from);
    const auto& b = net.node(to);
    const auto& l = net.link(from, to);
    const double p_det = det == detection::at_receiver ? detector_efficiency(p, b) : 1.0;
    const double arc_m = ground_distance_km(a, b) * 1e3;
    auto lp = base_link_params(p);
    lp.p_det = p_det;
    switch (hop_kind(a, b, l)) {
        case link_kind::fiber:
            return build_fiber(l.length_km >= 0.0 ? l.length_km : arc_m / 1e3, p_det, p.fiber_loss_db_per_km);
        case link_kind::downlink: {
            lp.waist = p.w0_balloon;
            lp.aperture.diameter = p.d_rx_ground;
            return build_downlink(make_slant_geometry_from_arc(b.altitude_m, a.altitude_m, arc_m), lp, atm);
        }
        case link_kind::uplink: {
            lp.waist = p.w0_ground;
            lp.aperture.diameter = p.d_rx_balloon;
            return build_uplink(make_slant_geometry_from_arc(a.altitude_m, b.altitude_m, arc_m), lp, atm);
        }
        case link_kind::horizontal: {
            if (std::abs(a.altitude_m - b.altitude_m) > 1e-6)
                throw config_error("horizontal link " + from + "-" + to + " joins balloons at different altitudes");
            lp.waist = p.w0_balloon;
            lp.aperture.diameter = p.d_rx_balloon;
            const double R = earth_radius_m + a.altitude_m;
            const double z = 2.0 * R * std::sin(arc_m / (2.0 * earth_radius_m));
            return build_horizontal(a.altitude_m, z, lp, atm);
        }
    }
    throw config_error("unsupported link");
}

struct hop_row {
    std::string label;
    std::string from;
    std::string to;
    channel_model channel;
    sim_result result;
};

struct scenario_result {
    protocol_kind protocol = protocol_kind::bb84_trusted;
    std::vector<hop_row> hops;
    sim_result end_to_end;
    double end_to_end_analytic_rate = 0.0;  // analytic SKR end to end
    std::vector<std::string> warnings;
};

struct execution_options {
    std::uint64_t photons = 0;  // 0: take from the config
    std::uint64_t repeats = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned workers = 1;
};

namespace detail {

inline std::vector<const channel_model*> hop_pointers(const std::vector<hop_row>& rows, std::size_t begin,
                                                      std::size_t end) {
    std::vector<const channel_model*> out;
    for (std::size_t i = begin; i < end; ++i) out.push_back(&rows[i].channel);
    return out;
}

inline void add_route(std::vector<hop_row>& rows, const physics_params& p, const network_spec& net,
                      const std::vector<std::string>& route, const std::string& tag, bool detect_last,
                      const transmittance_provider& atm) {
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        const bool last = i + 2 == route.size();
        const auto det = detect_last && last ? detection::at_receiver : detection::none;
        hop_row r;
        r.label = tag;
        r.from = route[i];
        r.to = route[i + 1];
        r.channel = build_hop(p, net, r.from, r.to, det, atm);
        rows.push_back(std::move(r));
    }
}

}  // namespace detail

/// Build every channel of the scenario and run its protocol.
inline scenario_result run_scenario(const scenario_config& cfg, const execution_options& ex = {}) {
    const auto atm = make_transmittance(cfg);
    const auto& p = cfg.phys;
    const auto& net = cfg.network;
    if (net.nodes.empty()) throw config_error("scenario has no network (give 'network' or 'topology')");
    protocol_params pp{p.source_rate_hz, p.mu, p.qber_x, p.qber_z, 0.0};
    const std::uint64_t photons = ex.photons ? ex.photons : cfg.photons;
    const std::uint64_t repeats = ex.repeats ? ex.repeats : cfg.repeats;
    const std::uint64_t seed = ex.seed_set ? ex.seed : cfg.seed;

    scenario_result out;
    out.protocol = cfg.protocol;
    auto repeated = [&](auto&& one, double rate_scale) {
        std::vector<sim_result> runs;
        for (std::uint64_t r = 0; r < repeats; ++r) runs.push_back(one(r));
        return merge_results(runs, pp, rate_scale);
    };

    if (cfg.protocol == protocol_kind::bb84_trusted) {
        pp.p_bsm = 0.0;
        for (std::size_t i = 0; i < net.links.size(); ++i) {
            hop_row row;
            row.label = "link";
            row.from = net.links[i].from;
            row.to = net.links[i].to;
            row.channel = build_hop(p, net, row.from, row.to, detection::at_receiver, *atm);
            const std::uint64_t stream_base = (i + 1) << 20;
            row.result = repeated(
                [&](std::uint64_t r) {
                    return run_bb84(row.channel, photons, pp, {seed, stream_base + r, ex.workers});
                },
                pp.source_rate * pp.mu);
            out.hops.push_back(std::move(row));
        }
        // end to end: the hops along the route, or every link
        std::vector<sim_result> chain;
        double analytic = infinity;
        const double frac = secret_fraction(pp.qber_x, pp.qber_z);
        std::size_t bottleneck = 0;
        for (std::size_t i = 0; i < out.hops.size(); ++i) {
            bool on_route = cfg.route.empty();
            for (std::size_t k = 0; k + 1 < cfg.route.size(); ++k) {
                const auto& h = out.hops[i];
                if ((h.from == cfg.route[k] && h.to == cfg.route[k + 1]) ||
                    (h.to == cfg.route[k] && h.from == cfg.route[k + 1]))
                    on_route = true;
            }
            if (!on_route) continue;
            if (chain.empty() || out.hops[i].result.skr < trusted_node_rate(chain)) bottleneck = i;
            chain.push_back(out.hops[i].result);
            analytic = std::min(analytic, pp.source_rate * pp.mu * out.hops[i].channel.mean_efficiency * frac);
        }
        if (chain.empty()) throw config_error("route does not use any network link");
        out.end_to_end = out.hops[bottleneck].result;
        out.end_to_end.skr = trusted_node_rate(chain);
        out.end_to_end_analytic_rate = analytic;
    } else {
        const bool ent = cfg.protocol == protocol_kind::entanglement;
        detail::add_route(out.hops, p, net, cfg.route_a, "path_a", ent, *atm);
        const std::size_t split = out.hops.size();
        detail::add_route(out.hops, p, net, cfg.route_b, "path_b", ent, *atm);
        const auto pa = detail::hop_pointers(out.hops, 0, split);
        const auto pb = detail::hop_pointers(out.hops, split, out.hops.size());
        const double frac = secret_fraction(pp.qber_x, pp.qber_z);
        if (ent) {
            out.end_to_end = repeated(
                [&](std::uint64_t r) {
                    return run_entanglement(pa, pb, photons, pp, {seed, (std::uint64_t{1} << 40) + r, ex.workers});
                },
                pp.source_rate * pp.mu);
            out.end_to_end_analytic_rate = pp.source_rate * pp.mu * out.end_to_end.analytic_mean * frac;
        } else {
            const auto& middle = net.node(cfg.route_a.back());
            pp.p_bsm = p.p_bsm ? *p.p_bsm : bsm_success(detector_efficiency(p, middle));
            out.end_to_end = repeated(
                [&](std::uint64_t r) {
                    return run_mdi(pa, pb, pp.p_bsm, photons, pp, {seed, (std::uint64_t{2} << 40) + r, ex.workers});
                },
                pp.source_rate * pp.mu * pp.mu);
            out.end_to_end_analytic_rate = pp.source_rate * pp.mu * pp.mu * out.end_to_end.analytic_mean * frac;
        }
        for (auto& h : out.hops) {
            h.result.analytic_mean = h.channel.mean_efficiency;
            h.result.sent = 0;
        }
    }
    for (const auto& h : out.hops)
        for (const auto& w : h.channel.warnings) out.warnings.push_back(h.from + "->" + h.to + ": " + w);
    for (const auto& w : out.end_to_end.warnings) out.warnings.push_back("end-to-end: " + w);
    return out;
}

// ---------------------------------------------------------------- CSV output

namespace detail {

inline std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

inline std::string join_warnings(const std::vector<std::string>& w) {
    std::string s;
    for (const auto& x : w) {
        if (!s.empty()) s += "; ";
        s += x;
    }
    return s;
}

}  // namespace detail

inline void write_metadata(std::ostream& out, const scenario_config& cfg, std::uint64_t seed, const std::string& verb) {
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, config_hash(cfg.source));
    out << "# hapq " << version << "\n";
    out << "# verb=" << verb << "\n";
    out << "# seed=" << seed << "\n";
    out << "# config_hash=" << hash << "\n";
    out << "# protocol=" << to_string(cfg.protocol) << "\n";
}

inline void write_scenario_csv(std::ostream& out, const scenario_config& cfg, const scenario_result& res,
                               std::uint64_t seed) {
    using detail::num;
    write_metadata(out, cfg, seed, "scenario");
    out << "row,kind,from,to,zenith_deg,distance_km,sent,received,mean_eff,stderr,analytic_mean,raw_rate_bps,"
           "skr_bps,skr_err_bps,warnings\n";
    for (const auto& h : res.hops) {
        const auto& ch = h.channel;
        const auto& r = h.result;
        const double zen = ch.kind == link_kind::fiber ? 0.0 : ch.geometry.zenith * 180.0 / pi;
        double dkm = ch.geometry.slant_range / 1e3;
        if (ch.kind == link_kind::fiber) dkm = -10.0 * std::log10(ch.eta_atm) / cfg.phys.fiber_loss_db_per_km;
        const bool simulated = r.sent > 0;
        out << h.label << ',' << to_string(ch.kind) << ',' << h.from << ',' << h.to << ',' << num(zen) << ','
            << num(dkm) << ',' << r.sent << ',' << r.received << ',' << (simulated ? num(r.mean_eff) : "") << ','
            << (simulated ? num(r.stderr_eff) : "") << ',' << num(ch.mean_efficiency) << ','
            << (simulated ? num(r.raw_rate) : "") << ',' << (simulated ? num(r.skr) : "") << ','
            << (simulated ? num(r.skr_err) : "") << ',' << detail::csv_field(detail::join_warnings(ch.warnings))
            << '\n';
    }
    const auto& e = res.end_to_end;
    out << "end-to-end,,,,,," << e.sent << ',' << e.received << ',' << num(e.mean_eff) << ',' << num(e.stderr_eff)
        << ',' << num(e.analytic_mean) << ',' << num(e.raw_rate) << ',' << num(e.skr) << ',' << num(e.skr_err) << ','
        << detail::csv_field(detail::join_warnings(e.warnings)) << '\n';
}

// ---------------------------------------------------------------- sweeps

struct sweep_row {
    double value = 0.0;
    std::uint64_t repeat = 0;
    sim_result result;
    double analytic_rate = 0.0;
    std::string error;
};

/// Configuration with one flat parameter replaced.
inline scenario_config with_parameter(const scenario_config& cfg, const std::string& key, double value) {
    nlohmann::json j = cfg.source;
    if (key == "n_ao" || key == "n_max") j[key] = static_cast<long long>(std::llround(value));
    else j[key] = value;
    j.erase("sweep");
    return parse_config_json(j, cfg.base_dir);
}

/// One row per swept value per repeat. Rows come out in sweep order no
/// matter how the points are spread over workers.
inline std::vector<sweep_row> run_sweep(const scenario_config& cfg, const std::string& key,
                                        const std::vector<double>& values, const execution_options& ex = {}) {
    const auto& keys = physics_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw config_error("sweep parameter '" + key + "' is not a configurable parameter");
    const std::uint64_t repeats = ex.repeats ? ex.repeats : cfg.repeats;
    std::vector<sweep_row> rows(values.size() * repeats);
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::uint64_t r = 0; r < repeats; ++r) rows[i * repeats + r] = {values[i], r, {}, 0.0, {}};

    auto run_point = [&](std::size_t idx) {
        auto& row = rows[idx];
        try {
            const auto point = with_parameter(cfg, key, row.value);
            execution_options one = ex;
            one.repeats = 1;
            one.workers = 1;
            one.seed = (ex.seed_set ? ex.seed : cfg.seed) + row.repeat;
            one.seed_set = true;
            const auto res = run_scenario(point, one);
            row.result = res.end_to_end;
            row.analytic_rate = res.end_to_end_analytic_rate;
            for (const auto& w : res.warnings) row.result.warnings.push_back(w);
        } catch (const error& e) {
            row.error = e.what();
        }
    };
    const unsigned w = std::max(1u, std::min<unsigned>(resolve_workers(ex.workers), static_cast<unsigned>(rows.size())));
    if (w <= 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) run_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < w; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < rows.size(); i = next++) run_point(i);
            });
        for (auto& th : pool) th.join();
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const scenario_config& cfg, const std::string& key,
                            const std::vector<sweep_row>& rows, std::uint64_t seed) {
    using detail::num;
    write_metadata(out, cfg, seed, "sweep");
    out << "# parameter=" << key << "\n";
    out << "value,repeat,sent,received,mean_eff,stderr,analytic_mean,raw_rate_bps,skr_bps,analytic_skr_bps,error,"
           "warnings\n";
    for (const auto& r : rows) {
        const auto& s = r.result;
        out << num(r.value) << ',' << r.repeat << ',' << s.sent << ',' << s.received << ',' << num(s.mean_eff) << ','
            << num(s.stderr_eff) << ',' << num(s.analytic_mean) << ',' << num(s.raw_rate) << ',' << num(s.skr) << ','
            << num(r.analytic_rate) << ',' << detail::csv_field(r.error) << ','
            << detail::csv_field(detail::join_warnings(s.warnings)) << '\n';
    }
}

// ---------------------------------------------------------------- validity

inline void write_validity_csv(std::ostream& out, const scenario_config& cfg, const std::vector<hop_row>& hops) {
    using detail::num;
    write_metadata(out, cfg, cfg.seed, "validate");
    out << "from,to,kind,aperture_pass,d_rx_m,rho_c_m,rayleigh_pass,max_sigma_waves,wander_pass,wander_ratio,notes\n";
    for (const auto& h : hops) {
        const auto& v = h.channel.validity;
        auto flag = [](const validity_check& c) { return c.applicable ? (c.pass ? "pass" : "fail") : "n/a"; };
        out << h.from << ',' << h.to << ',' << to_string(h.channel.kind) << ',' << flag(v.aperture_averaging) << ','
            << num(v.aperture_averaging.value) << ',' << num(v.aperture_averaging.threshold) << ','
            << flag(v.rayleigh) << ',' << num(v.rayleigh.value) << ',' << flag(v.small_wander) << ','
            << num(v.small_wander.value) << ',' << detail::csv_field(detail::join_warnings(v.notes)) << '\n';
    }
}

/// Channels of a scenario without running any protocol.
inline std::vector<hop_row> build_scenario_channels(const scenario_config& cfg) {
    const auto atm = make_transmittance(cfg);
    std::vector<hop_row> rows;
    if (cfg.protocol == protocol_kind::bb84_trusted) {
        for (const auto& l : cfg.network.links) {
            hop_row r;
            r.label = "link";
            r.from = l.from;
            r.to = l.to;
            r.channel = build_hop(cfg.phys, cfg.network, l.from, l.to, detection::at_receiver, *atm);
            rows.push_back(std::move(r));
        }
    } else {
        const bool ent = cfg.protocol == protocol_kind::entanglement;
        detail::add_route(rows, cfg.phys, cfg.network, cfg.route_a, "path_a", ent, *atm);
        detail::add_route(rows, cfg.phys, cfg.network, cfg.route_b, "path_b", ent, *atm);
    }
    return rows;
}

}  // namespace hapq

#endif  // HAPQ_SCENARIO_HPP

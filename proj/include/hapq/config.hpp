#ifndef HAPQ_CONFIG_HPP
#define HAPQ_CONFIG_HPP

// Scenario configuration: strict JSON with baseline defaults for every
// physical parameter, plus the network, protocol and routes.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "channel.hpp"
#include "errors.hpp"
#include "netsim.hpp"
#include "transmittance.hpp"

namespace hapq {

inline constexpr const char* version = "0.1.0";
inline constexpr const char* transmittance_dir_env = "HAPQ_TRANSMITTANCE_DIR";

enum class protocol_kind { bb84_trusted, entanglement, mdi };

inline const char* to_string(protocol_kind p) {
    switch (p) {
        case protocol_kind::bb84_trusted: return "bb84-trusted";
        case protocol_kind::entanglement: return "entanglement";
        case protocol_kind::mdi: return "mdi";
    }
    return "?";
}

/// Flat physical and protocol parameters; defaults are the baseline set.
struct physics_params {
    double wavelength_nm = 1550.0;
    double fiber_loss_db_per_km = 0.18;
    double p_det_ground = 0.85;
    double p_det_balloon = 0.25;
    double ground_alt_m = 20.0;
    double cn2_ground = 9.6e-14;
    double wind_speed = 10.0;
    double tracking_eff = 0.8;
    double obstruction_ratio = 0.3;
    double theta_pe = 1e-6;  // rad
    double K_I = 1.0;
    double ao_delay_s = 2e-3;
    double ao_integration_s = 1e-3;
    int n_max = 150;
    double balloon_alt_m = 35e3;
    double w0_ground = 0.2;
    double w0_balloon = 0.1;
    double d_rx_ground = 0.4;
    double d_rx_balloon = 0.3;
    int n_ao = 6;
    double coupling_beta = 1.12;
    double source_rate_hz = 80e6;
    double mu = 0.01;
    double qber_x = 0.04;
    double qber_z = 0.04;
    std::optional<double> p_bsm;  // default: 0.5 p_det^2 of the measuring node
    double d_cities_km = 80.0;    // used by topology templates
    logamp_convention logamp = logamp_convention::full;
    loop_transfer loop_tf = loop_transfer::standard;
    bool eta_phi_split = false;
};

struct scenario_config {
    physics_params phys;
    protocol_kind protocol = protocol_kind::bb84_trusted;
    std::string topology;  // empty when the network is explicit
    network_spec network;
    std::vector<std::string> route;    // bb84-trusted: links counted end to end (optional)
    std::vector<std::string> route_a;  // entanglement / mdi
    std::vector<std::string> route_b;
    std::optional<double> transmittance_value;
    std::string transmittance_path;
    std::uint64_t seed = 1;
    std::uint64_t photons = 150'000;
    std::uint64_t repeats = 1;
    std::string sweep_parameter;
    std::vector<double> sweep_values;
    std::string base_dir;  // directory of the config file
    nlohmann::json source = nlohmann::json::object();
};

namespace detail {

inline std::string fmt_range(double lo, double hi) {
    std::ostringstream s;
    s << "[" << lo << ", " << hi << "]";
    return s.str();
}

inline double number_in(const nlohmann::json& j, const std::string& key, double lo, double hi, bool open_lo = false,
                        bool open_hi = false) {
    if (!j.is_number()) throw config_error("'" + key + "' must be a number");
    const double v = j.get<double>();
    const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
    if (!ok) {
        std::ostringstream s;
        s << "'" << key << "' = " << v << " outside allowed range " << (open_lo ? "(" : "[") << lo << ", " << hi
          << (open_hi ? ")" : "]");
        throw config_error(s.str());
    }
    return v;
}

inline int integer_in(const nlohmann::json& j, const std::string& key, int lo, int hi) {
    if (!j.is_number_integer()) throw config_error("'" + key + "' must be an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > hi) throw config_error("'" + key + "' = " + std::to_string(v) + " outside allowed range [" +
                                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

inline std::uint64_t count_in(const nlohmann::json& j, const std::string& key, std::uint64_t lo) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw config_error("'" + key + "' must be a non-negative integer");
    const auto v = j.get<std::uint64_t>();
    if (v < lo) throw config_error("'" + key + "' must be >= " + std::to_string(lo));
    return v;
}

inline std::string string_of(const nlohmann::json& j, const std::string& key) {
    if (!j.is_string()) throw config_error("'" + key + "' must be a string");
    return j.get<std::string>();
}

inline std::vector<std::string> string_list(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array()) throw config_error("'" + key + "' must be an array of node ids");
    std::vector<std::string> out;
    for (const auto& e : j) out.push_back(string_of(e, key));
    return out;
}

inline void reject_unknown(const nlohmann::json& obj, const std::vector<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw config_error("unknown key '" + it.key() + "'" + (where.empty() ? "" : " in " + where));
    }
}

}  // namespace detail

/// Names accepted for flat parameters (also the sweepable set).
inline const std::vector<std::string>& physics_keys() {
    static const std::vector<std::string> keys{
        "wavelength_nm", "fiber_loss_db_per_km", "p_det_ground", "p_det_balloon", "ground_alt_m",
        "cn2_ground", "wind_speed", "tracking_eff", "obstruction_ratio", "theta_pe", "K_I", "ao_delay_s",
        "ao_integration_s", "n_max", "balloon_alt_m", "w0_ground", "w0_balloon", "d_rx_ground", "d_rx_balloon",
        "n_ao", "coupling_beta", "source_rate_hz", "mu", "qber_x", "qber_z", "p_bsm", "d_cities_km",
        "logamp_convention", "loop_tf", "eta_phi_mean"};
    return keys;
}

/// Apply one flat parameter with range checking.
inline void set_physics(physics_params& p, const std::string& key, const nlohmann::json& v) {
    using namespace detail;
    if (key == "wavelength_nm") p.wavelength_nm = number_in(v, key, 100.0, 20000.0);
    else if (key == "fiber_loss_db_per_km") p.fiber_loss_db_per_km = number_in(v, key, 0.0, 10.0);
    else if (key == "p_det_ground") p.p_det_ground = number_in(v, key, 0.0, 1.0);
    else if (key == "p_det_balloon") p.p_det_balloon = number_in(v, key, 0.0, 1.0);
    else if (key == "ground_alt_m") p.ground_alt_m = number_in(v, key, 0.0, 9000.0);
    else if (key == "cn2_ground") p.cn2_ground = number_in(v, key, 0.0, 1e-10);
    else if (key == "wind_speed") p.wind_speed = number_in(v, key, 0.0, 100.0);
    else if (key == "tracking_eff") p.tracking_eff = number_in(v, key, 0.0, 1.0);
    else if (key == "obstruction_ratio") p.obstruction_ratio = number_in(v, key, 0.0, 1.0, false, true);
    else if (key == "theta_pe") p.theta_pe = number_in(v, key, 0.0, 1e-2);
    else if (key == "K_I") p.K_I = number_in(v, key, 0.0, 10.0);
    else if (key == "ao_delay_s") p.ao_delay_s = number_in(v, key, 0.0, 1.0, true);
    else if (key == "ao_integration_s") p.ao_integration_s = number_in(v, key, 0.0, 1.0, true);
    else if (key == "n_max") p.n_max = integer_in(v, key, 1, 400);
    else if (key == "balloon_alt_m") p.balloon_alt_m = number_in(v, key, 1000.0, 60000.0);
    else if (key == "w0_ground") p.w0_ground = number_in(v, key, 0.0, 5.0, true);
    else if (key == "w0_balloon") p.w0_balloon = number_in(v, key, 0.0, 5.0, true);
    else if (key == "d_rx_ground") p.d_rx_ground = number_in(v, key, 0.0, 10.0, true);
    else if (key == "d_rx_balloon") p.d_rx_balloon = number_in(v, key, 0.0, 10.0, true);
    else if (key == "n_ao") p.n_ao = integer_in(v, key, 0, 400);
    else if (key == "coupling_beta") p.coupling_beta = number_in(v, key, 0.0, 10.0, true);
    else if (key == "source_rate_hz") p.source_rate_hz = number_in(v, key, 0.0, 1e12, true);
    else if (key == "mu") p.mu = number_in(v, key, 0.0, 1.0, true);
    else if (key == "qber_x") p.qber_x = number_in(v, key, 0.0, 0.5, false, true);
    else if (key == "qber_z") p.qber_z = number_in(v, key, 0.0, 0.5, false, true);
    else if (key == "p_bsm") p.p_bsm = number_in(v, key, 0.0, 1.0);
    else if (key == "d_cities_km") p.d_cities_km = number_in(v, key, 0.0, 5000.0, true);
    else if (key == "logamp_convention") {
        const auto s = string_of(v, key);
        if (s == "full") p.logamp = logamp_convention::full;
        else if (s == "quarter") p.logamp = logamp_convention::quarter;
        else throw config_error("'logamp_convention' must be \"full\" or \"quarter\"");
    } else if (key == "loop_tf") {
        const auto s = string_of(v, key);
        if (s == "standard") p.loop_tf = loop_transfer::standard;
        else if (s == "literal") p.loop_tf = loop_transfer::literal;
        else throw config_error("'loop_tf' must be \"standard\" or \"literal\"");
    } else if (key == "eta_phi_mean") {
        const auto s = string_of(v, key);
        if (s == "product") p.eta_phi_split = false;
        else if (s == "split") p.eta_phi_split = true;
        else throw config_error("'eta_phi_mean' must be \"product\" or \"split\"");
    } else {
        throw config_error("unknown key '" + key + "'");
    }
}

inline void check_physics(const physics_params& p) {
    if (p.n_ao > p.n_max) throw config_error("'n_ao' must not exceed 'n_max'");
    if (!(p.balloon_alt_m > p.ground_alt_m)) throw config_error("'balloon_alt_m' must exceed 'ground_alt_m'");
}

namespace detail {

inline network_spec parse_network(const nlohmann::json& j, const physics_params& phys) {
    if (!j.is_object()) throw config_error("'network' must be an object");
    reject_unknown(j, {"nodes", "links"}, "network");
    network_spec net;
    if (!j.contains("nodes") || !j["nodes"].is_array()) throw config_error("'network.nodes' must be an array");
    for (const auto& n : j["nodes"]) {
        if (!n.is_object()) throw config_error("network node must be an object");
        reject_unknown(n, {"id", "kind", "position_km", "altitude_m"}, "network node");
        network_node node;
        if (!n.contains("id")) throw config_error("network node needs an 'id'");
        node.id = string_of(n["id"], "id");
        const auto kind = n.contains("kind") ? string_of(n["kind"], "kind") : std::string("qonnector");
        if (kind == "qonnector") node.kind = node_kind::qonnector;
        else if (kind == "qlient") node.kind = node_kind::qlient;
        else if (kind == "balloon") node.kind = node_kind::balloon;
        else throw config_error("node kind must be qonnector, qlient or balloon");
        node.position_km = n.contains("position_km") ? number_in(n["position_km"], "position_km", -2e4, 2e4) : 0.0;
        if (n.contains("altitude_m")) node.altitude_m = number_in(n["altitude_m"], "altitude_m", 0.0, 60000.0);
        else node.altitude_m = node.kind == node_kind::balloon ? phys.balloon_alt_m : phys.ground_alt_m;
        net.nodes.push_back(node);
    }
    if (j.contains("links")) {
        if (!j["links"].is_array()) throw config_error("'network.links' must be an array");
        for (const auto& l : j["links"]) {
            if (!l.is_object()) throw config_error("network link must be an object");
            reject_unknown(l, {"from", "to", "type", "length_km"}, "network link");
            network_link link;
            if (!l.contains("from") || !l.contains("to")) throw config_error("network link needs 'from' and 'to'");
            link.from = string_of(l["from"], "from");
            link.to = string_of(l["to"], "to");
            const auto type = l.contains("type") ? string_of(l["type"], "type") : std::string("free-space");
            if (type == "fiber") link.fiber = true;
            else if (type != "free-space") throw config_error("link type must be fiber or free-space");
            if (l.contains("length_km")) link.length_km = number_in(l["length_km"], "length_km", 0.0, 1e4);
            net.links.push_back(link);
        }
    }
    net.validate();
    return net;
}

}  // namespace detail

/// Build the network and routes of a topology template.
inline void apply_topology(scenario_config& c) {
    if (c.topology.empty()) return;
    const auto& p = c.phys;
    const double d = p.d_cities_km;
    network_spec net;
    net.nodes.push_back({"qonnector_a", node_kind::qonnector, 0.0, p.ground_alt_m});
    net.nodes.push_back({"qonnector_b", node_kind::qonnector, d, p.ground_alt_m});
    if (c.topology == "middle-balloon") {
        net.nodes.push_back({"balloon", node_kind::balloon, d / 2.0, p.balloon_alt_m});
        if (c.protocol == protocol_kind::mdi) {
            net.links.push_back({"qonnector_a", "balloon", false, -1.0});
            net.links.push_back({"qonnector_b", "balloon", false, -1.0});
            c.route_a = {"qonnector_a", "balloon"};
            c.route_b = {"qonnector_b", "balloon"};
        } else {
            net.links.push_back({"balloon", "qonnector_a", false, -1.0});
            net.links.push_back({"balloon", "qonnector_b", false, -1.0});
            c.route_a = {"balloon", "qonnector_a"};
            c.route_b = {"balloon", "qonnector_b"};
        }
    } else if (c.topology == "middle-fiber") {
        net.nodes.push_back({"middle", node_kind::qonnector, d / 2.0, p.ground_alt_m});
        if (c.protocol == protocol_kind::mdi) {
            net.links.push_back({"qonnector_a", "middle", true, -1.0});
            net.links.push_back({"qonnector_b", "middle", true, -1.0});
            c.route_a = {"qonnector_a", "middle"};
            c.route_b = {"qonnector_b", "middle"};
        } else {
            net.links.push_back({"middle", "qonnector_a", true, -1.0});
            net.links.push_back({"middle", "qonnector_b", true, -1.0});
            c.route_a = {"middle", "qonnector_a"};
            c.route_b = {"middle", "qonnector_b"};
        }
    } else {
        throw config_error("unknown topology '" + c.topology + "' (expected middle-balloon or middle-fiber)");
    }
    if (c.protocol == protocol_kind::bb84_trusted) {
        c.route = {c.route_a.back(), c.route_a.front(), c.route_b.back()};
        c.route_a.clear();
        c.route_b.clear();
    }
    net.validate();
    c.network = std::move(net);
}

/// Parse a configuration object. An empty object yields the baseline set.
inline scenario_config parse_config_json(const nlohmann::json& j, const std::string& base_dir = ".") {
    using namespace detail;
    if (!j.is_object()) throw config_error("configuration must be a JSON object");
    scenario_config c;
    c.base_dir = base_dir;
    c.source = j;
    std::vector<std::string> allowed = physics_keys();
    for (const char* k : {"protocol", "topology", "network", "route", "route_a", "route_b", "transmittance", "seed",
                          "photons", "repeats", "sweep"})
        allowed.emplace_back(k);
    reject_unknown(j, allowed, "");

    for (const auto& key : physics_keys())
        if (j.contains(key)) set_physics(c.phys, key, j[key]);
    check_physics(c.phys);

    if (j.contains("protocol")) {
        const auto s = string_of(j["protocol"], "protocol");
        if (s == "bb84-trusted") c.protocol = protocol_kind::bb84_trusted;
        else if (s == "entanglement") c.protocol = protocol_kind::entanglement;
        else if (s == "mdi") c.protocol = protocol_kind::mdi;
        else throw config_error("'protocol' must be bb84-trusted, entanglement or mdi");
    }
    if (j.contains("transmittance")) {
        const auto& t = j["transmittance"];
        if (t.is_number()) c.transmittance_value = number_in(t, "transmittance", 0.0, 1.0);
        else if (t.is_string()) c.transmittance_path = t.get<std::string>();
        else throw config_error("'transmittance' must be a number in [0, 1] or a table path");
    }
    if (j.contains("seed")) c.seed = count_in(j["seed"], "seed", 0);
    if (j.contains("photons")) c.photons = count_in(j["photons"], "photons", 1);
    if (j.contains("repeats")) c.repeats = count_in(j["repeats"], "repeats", 1);
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        if (!s.is_object()) throw config_error("'sweep' must be an object");
        reject_unknown(s, {"parameter", "values"}, "sweep");
        if (!s.contains("parameter")) throw config_error("'sweep' needs a 'parameter'");
        c.sweep_parameter = string_of(s["parameter"], "sweep.parameter");
        const auto& keys = physics_keys();
        if (std::find(keys.begin(), keys.end(), c.sweep_parameter) == keys.end())
            throw config_error("sweep parameter '" + c.sweep_parameter + "' is not a configurable parameter");
        if (s.contains("values")) {
            if (!s["values"].is_array()) throw config_error("'sweep.values' must be an array of numbers");
            for (const auto& v : s["values"]) {
                if (!v.is_number()) throw config_error("'sweep.values' must be an array of numbers");
                c.sweep_values.push_back(v.get<double>());
            }
        }
    }

    const bool has_network = j.contains("network");
    if (j.contains("topology")) {
        if (has_network) throw config_error("give either 'topology' or 'network', not both");
        c.topology = string_of(j["topology"], "topology");
        apply_topology(c);
    } else if (has_network) {
        c.network = parse_network(j["network"], c.phys);
    }
    if (j.contains("route")) c.route = string_list(j["route"], "route");
    if (j.contains("route_a")) c.route_a = string_list(j["route_a"], "route_a");
    if (j.contains("route_b")) c.route_b = string_list(j["route_b"], "route_b");

    if (!c.network.nodes.empty()) {
        if (c.protocol == protocol_kind::bb84_trusted) {
            if (!c.route.empty()) c.network.check_route(c.route);
        } else {
            if (c.route_a.empty() || c.route_b.empty())
                throw config_error(std::string(to_string(c.protocol)) + " needs 'route_a' and 'route_b'");
            c.network.check_route(c.route_a);
            c.network.check_route(c.route_b);
            const bool shared = c.protocol == protocol_kind::entanglement ? c.route_a.front() == c.route_b.front()
                                                                          : c.route_a.back() == c.route_b.back();
            if (!shared)
                throw config_error(c.protocol == protocol_kind::entanglement
                                       ? "entanglement routes must start at the same source node"
                                       : "mdi routes must end at the same middle node");
        }
    }
    return c;
}

inline scenario_config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(std::string("config '") + path + "': " + e.what());
    }
    const auto dir = std::filesystem::path(path).parent_path().string();
    return parse_config_json(j, dir.empty() ? "." : dir);
}

/// Resolve the transmittance provider for a configuration. Relative table
/// paths are looked up in the config directory, then in the directory named
/// by HAPQ_TRANSMITTANCE_DIR.
inline std::shared_ptr<const transmittance_provider> make_transmittance(const scenario_config& c) {
    if (c.transmittance_value) return constant_provider(*c.transmittance_value);
    if (c.transmittance_path.empty()) return constant_provider(1.0);
    namespace fs = std::filesystem;
    fs::path p(c.transmittance_path);
    std::vector<fs::path> candidates;
    if (p.is_absolute()) {
        candidates.push_back(p);
    } else {
        candidates.push_back(fs::path(c.base_dir) / p);
        if (const char* env = std::getenv(transmittance_dir_env)) candidates.push_back(fs::path(env) / p);
        candidates.push_back(p);
    }
    for (const auto& cand : candidates)
        if (fs::exists(cand)) return std::make_shared<transmittance_table>(load_table(cand.string()));
    throw config_error("transmittance table '" + c.transmittance_path + "' not found");
}

/// 64-bit FNV-1a of the canonical (sorted-key, compact) JSON text.
inline std::uint64_t config_hash(const nlohmann::json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace hapq

#endif  // HAPQ_CONFIG_HPP

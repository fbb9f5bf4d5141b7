// Command-line front end: channel, scenario, sweep and validate verbs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hapq/hapq.hpp"

namespace {

struct common_flags {
    std::string config;
    std::string out;
    std::string transmittance;
    std::uint64_t photons = 0;
    std::uint64_t repeats = 0;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

void add_common(CLI::App* cmd, common_flags& f) {
    cmd->add_option("--config", f.config, "scenario JSON file")->required();
    cmd->add_option("--out", f.out, "output CSV (default: stdout)");
    cmd->add_option("--transmittance", f.transmittance, "constant in [0, 1] or path to a transmittance table");
    cmd->add_option("--photons", f.photons, "photons (pairs, rounds) per run");
    cmd->add_option("--repeats", f.repeats, "independent repeats");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--workers", f.workers, "worker threads (0: hardware concurrency)");
}

hapq::scenario_config load(const common_flags& f) {
    auto cfg = hapq::parse_config(f.config);
    if (!f.transmittance.empty()) {
        nlohmann::json j = cfg.source;
        char* end = nullptr;
        const double v = std::strtod(f.transmittance.c_str(), &end);
        if (end != f.transmittance.c_str() && *end == '\0') j["transmittance"] = v;
        else j["transmittance"] = f.transmittance;
        auto base = cfg.base_dir;
        cfg = hapq::parse_config_json(j, base);
        // a path on the command line is relative to the working directory
        if (!cfg.transmittance_path.empty()) cfg.base_dir = ".";
    }
    return cfg;
}

hapq::execution_options exec_of(const common_flags& f, const CLI::App* cmd) {
    hapq::execution_options ex;
    ex.photons = f.photons;
    ex.repeats = f.repeats;
    ex.workers = f.workers;
    if (cmd->count("--seed") > 0) {
        ex.seed = f.seed;
        ex.seed_set = true;
    }
    return ex;
}

template <class Writer>
void emit(const std::string& path, Writer&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw hapq::config_error("cannot write '" + path + "'");
    write(out);
}

void report_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void write_channel(std::ostream& out, const hapq::scenario_config& cfg, const hapq::hop_row& h) {
    using hapq::detail::num;
    const auto& ch = h.channel;
    hapq::write_metadata(out, cfg, cfg.seed, "channel");
    out << "# link=" << h.from << "->" << h.to << " kind=" << hapq::to_string(ch.kind) << "\n";
    out << "# mean_efficiency=" << num(ch.mean_efficiency) << " eta_atm=" << num(ch.eta_atm)
        << " collection_mean=" << num(ch.collection.mean()) << " coupling_mean=" << num(ch.coupling.mean())
        << " p_det=" << num(ch.p_det) << "\n";
    const auto& s = ch.stats;
    out << "# rytov=" << num(s.rytov) << " scint_index=" << num(s.scint_index) << " rho_c=" << num(s.corr_width)
        << " r0=" << num(s.fried) << " theta0=" << num(s.isoplanatic) << " log_amp=" << num(s.log_amp) << "\n";
    out << "# w_lt=" << num(ch.spread.long_term) << " w_st=" << num(ch.spread.short_term)
        << " sigma_wander=" << num(ch.spread.total_wander) << " eta_phi_mean=" << num(ch.mean_eta_phi)
        << " eta_aniso=" << num(ch.eta_aniso) << "\n";
    out << "component,eta,pdf,cdf\n";
    auto dump = [&](const char* name, const hapq::efficiency_distribution& d) {
        std::ostringstream tmp;
        d.write_csv(tmp);
        std::string line;
        std::istringstream in(tmp.str());
        std::getline(in, line);  // header
        while (std::getline(in, line)) out << name << ',' << line << '\n';
    };
    dump("collection", ch.collection);
    dump("coupling", ch.coupling);
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = hapq::detail::trim(item);
        if (item.empty()) continue;
        out.push_back(hapq::detail::parse_number(item, 0));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free-space and fiber quantum channel simulator for balloon networks"};
    app.require_subcommand(1);

    common_flags chf, scf, swf, vaf;
    std::string link;
    auto* channel = app.add_subcommand("channel", "mean efficiency and distributions of one link");
    add_common(channel, chf);
    channel->add_option("--link", link, "link as from,to (default: first hop)");

    auto* scenario = app.add_subcommand("scenario", "run the configured protocol over the network");
    add_common(scenario, scf);

    std::string parameter, values;
    auto* sweep = app.add_subcommand("sweep", "sweep one parameter of a scenario");
    add_common(sweep, swf);
    sweep->add_option("--parameter", parameter, "parameter to sweep (default: from the config)");
    sweep->add_option("--values", values, "comma-separated values (default: from the config)");

    auto* validate = app.add_subcommand("validate", "validity report of every link");
    add_common(validate, vaf);

    CLI11_PARSE(app, argc, argv);

    try {
        if (channel->parsed()) {
            const auto cfg = load(chf);
            const auto hops = hapq::build_scenario_channels(cfg);
            if (hops.empty()) throw hapq::config_error("scenario has no links");
            const hapq::hop_row* pick = &hops.front();
            if (!link.empty()) {
                const auto comma = link.find(',');
                if (comma == std::string::npos) throw hapq::config_error("--link expects from,to");
                const auto from = link.substr(0, comma);
                const auto to = link.substr(comma + 1);
                pick = nullptr;
                for (const auto& h : hops)
                    if (h.from == from && h.to == to) pick = &h;
                if (!pick) throw hapq::config_error("no hop " + from + "->" + to + " in the scenario");
            }
            report_warnings(pick->channel.warnings);
            emit(chf.out, [&](std::ostream& o) { write_channel(o, cfg, *pick); });
        } else if (scenario->parsed()) {
            const auto cfg = load(scf);
            const auto ex = exec_of(scf, scenario);
            const auto res = hapq::run_scenario(cfg, ex);
            report_warnings(res.warnings);
            emit(scf.out, [&](std::ostream& o) {
                hapq::write_scenario_csv(o, cfg, res, ex.seed_set ? ex.seed : cfg.seed);
            });
        } else if (sweep->parsed()) {
            const auto cfg = load(swf);
            const auto ex = exec_of(swf, sweep);
            const std::string key = parameter.empty() ? cfg.sweep_parameter : parameter;
            if (key.empty()) throw hapq::config_error("no sweep parameter: pass --parameter or set 'sweep'");
            const auto vals = sweep->count("--values") > 0 ? parse_values(values) : cfg.sweep_values;
            const auto rows = hapq::run_sweep(cfg, key, vals, ex);
            bool failed = false;
            for (const auto& r : rows) {
                if (r.error.empty()) continue;
                std::cerr << "error at " << key << "=" << r.value << ": " << r.error << '\n';
                failed = true;
            }
            emit(swf.out, [&](std::ostream& o) {
                hapq::write_sweep_csv(o, cfg, key, rows, ex.seed_set ? ex.seed : cfg.seed);
            });
            if (failed) return 1;
        } else if (validate->parsed()) {
            const auto cfg = load(vaf);
            const auto hops = hapq::build_scenario_channels(cfg);
            for (const auto& h : hops) report_warnings(h.channel.warnings);
            emit(vaf.out, [&](std::ostream& o) { hapq::write_validity_csv(o, cfg, hops); });
        }
    } catch (const hapq::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

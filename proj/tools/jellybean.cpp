// Scenario runner for the Jellybean / Jellybean+ pairing simulator.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jellybean/scenario.hpp"
#include "jellybean/trace.hpp"

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("JELLYBEAN_OUT")) return env;
    return ".";
}

struct Common {
    std::string config;
    std::string out = default_out_dir();
    uint64_t seed = 0;
    bool seed_set = false;
    bool dump_stages = false;
    int parallel = 1;  // accepted for interface stability; runs are sequential
};

void add_common(CLI::App* app, Common& c, bool config_required = true) {
    auto* opt = app->add_option("--config", c.config, "scenario config (JSON)");
    if (config_required) opt->required();
    app->add_option("--out", c.out, "output directory (env JELLYBEAN_OUT overrides default)");
    app->add_option("--seed", c.seed, "override the config's masterSeed")
        ->each([&c](const std::string&) { c.seed_set = true; });
    app->add_flag("--dump-stages", c.dump_stages, "write intermediate pipeline stages");
    app->add_option("--parallel", c.parallel, "worker count (output order is deterministic)");
}

jb::ScenarioConfig load(const Common& c) {
    jb::ScenarioConfig cfg = jb::load_scenario(c.config);
    if (c.seed_set) cfg.master_seed = c.seed;
    return cfg;
}

void dump_stages(const jb::ScenarioResult& r, const jb::ScenarioConfig& cfg,
                 const std::string& out) {
    jb::save_trace(r.trace_a, out + "/" + r.name + "_A.trace");
    jb::save_trace(r.trace_d, out + "/" + r.name + "_D.trace");
    jb::AfStages stages;
    jb::fingerprint(r.trace_a, cfg.af, r.fingerprint_a.gray_bits, &stages);
    std::ofstream f(out + "/" + r.name + "_stages.txt");
    f << "gamma:";
    for (double v : stages.gamma.values) f << ' ' << jb::scn_detail::fmt(v);
    f << "\ntau: " << jb::scn_detail::fmt(stages.tau) << "\nbits: "
      << jb::bits_to_string(stages.detection) << "\nfingerprint: "
      << jb::bits_to_string(r.fingerprint_a.bits) << "\n";
}

int run_and_report(const Common& c) {
    jb::ScenarioConfig cfg = load(c);
    jb::ScenarioResult r = jb::run_scenario(cfg);
    jb::write_reports(r, c.out);
    if (c.dump_stages) dump_stages(r, cfg, c.out);
    std::cout << jb::report_json(r).dump(2) << "\n";
    return 0;  // pairing failure is data, not an error
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jellybean secret-free pairing simulator"};
    app.require_subcommand(1);

    Common c_sim, c_pair, c_disc, c_uph, c_attack, c_sweep, c_enc, c_rep;

    auto* sim = app.add_subcommand("simulate", "synthesize CSI traces only");
    add_common(sim, c_sim);

    auto* pair = app.add_subcommand("pair", "full pairing run with reports");
    add_common(pair, c_pair);

    auto* disc = app.add_subcommand("discover", "path discovery + timing");
    add_common(disc, c_disc);

    auto* uph = app.add_subcommand("uph", "uncoordinated path hopping run");
    add_common(uph, c_uph);

    auto* attack = app.add_subcommand("attack", "pairing run with adversaries");
    add_common(attack, c_attack);
    std::string kind, fill = "randomGuess";
    double phi = 20.0, dwell = 0.0;
    int trials = 1;
    attack->add_option("--kind", kind, "append an adversary: eavesdropper|keylogger|beamSteal|colocated");
    attack->add_option("--phi", phi, "eavesdropper angle (degrees)");
    attack->add_option("--fill", fill, "gap fill strategy");
    attack->add_option("--dwell", dwell, "override hop dwell time (seconds)");
    attack->add_option("--trials", trials, "repeat with derived seeds");

    auto* sweep = app.add_subcommand("sweep", "parameter sweep with selection rule");
    add_common(sweep, c_sweep);
    std::string sweep_param;
    std::vector<double> sweep_values;
    sweep->add_option("--param", sweep_param, "override sweep parameter");
    sweep->add_option("--values", sweep_values, "override sweep values");

    auto* enc = app.add_subcommand("encode", "fingerprint a recorded trace file");
    add_common(enc, c_enc, false);
    std::string trace_path, fp_out;
    enc->add_option("--trace", trace_path, "trace file (binary CsiTrace format)")->required();
    enc->add_option("--fingerprint-out", fp_out, "output file (default stdout)");

    auto* rep = app.add_subcommand("report", "pretty-print a stored report");
    std::string report_path;
    rep->add_option("--file", report_path, "report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            jb::ScenarioConfig cfg = load(c_sim);
            jb::ScenarioResult r = jb::run_scenario(cfg);
            jb::save_trace(r.trace_a, c_sim.out + "/" + r.name + "_A.trace");
            jb::save_trace(r.trace_d, c_sim.out + "/" + r.name + "_D.trace");
            if (c_sim.dump_stages) {
                jb::save_trace_csv(r.trace_a, c_sim.out + "/" + r.name + "_A.csv");
                jb::save_trace_csv(r.trace_d, c_sim.out + "/" + r.name + "_D.csv");
            }
            std::cout << "wrote " << r.name << "_{A,D}.trace to " << c_sim.out << "\n";
            return 0;
        }
        if (*pair) return run_and_report(c_pair);
        if (*disc) {
            jb::ScenarioConfig cfg = load(c_disc);
            jb::Scene s = jb::build_scene(cfg.scene);
            auto [va, vd] = jb::path_discovery(s, cfg.pair_a, cfg.pair_d, cfg.epsilon_db,
                                               jb::derive_seed(cfg.master_seed, "discovery"));
            nlohmann::json j;
            j["viableSectorsA"] = va.sectors;
            j["viableSectorsD"] = vd.sectors;
            jb::DiscoveryTiming t;
            t.sector_count = s.sector_count;
            j["discoveryTimeSec"] = jb::scn_detail::fmt(jb::discovery_time(t));
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (*uph) {
            jb::ScenarioConfig cfg = load(c_uph);
            cfg.protocol = "jellybeanPlus";
            jb::ScenarioResult r = jb::run_scenario(cfg);
            jb::write_reports(r, c_uph.out);
            if (c_uph.dump_stages) dump_stages(r, cfg, c_uph.out);
            std::cout << jb::report_json(r).dump(2) << "\n";
            return 0;
        }
        if (*attack) {
            jb::ScenarioConfig cfg = load(c_attack);
            if (dwell > 0.0) cfg.dwell_sec = dwell;
            if (!kind.empty()) {
                jb::AdversaryConfig a;
                a.kind = kind;
                a.phi_deg = phi;
                a.fill = fill;
                jb::parse_fill_strategy(fill);
                cfg.adversaries.push_back(a);
            }
            nlohmann::json all = nlohmann::json::array();
            for (int t = 0; t < std::max(trials, 1); ++t) {
                jb::ScenarioConfig run = cfg;
                if (t > 0)
                    run.master_seed =
                        jb::derive_seed(cfg.master_seed, "trial/" + std::to_string(t));
                run.name = trials > 1 ? cfg.name + "_t" + std::to_string(t) : cfg.name;
                jb::ScenarioResult r = jb::run_scenario(run);
                jb::write_reports(r, c_attack.out);
                all.push_back(jb::report_json(r));
            }
            std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
            return 0;
        }
        if (*sweep) {
            jb::ScenarioConfig cfg = load(c_sweep);
            std::string param = sweep_param.empty() ? cfg.sweep_param : sweep_param;
            std::vector<double> values =
                sweep_values.empty() ? cfg.sweep_values : sweep_values;
            auto repj = jb::sweep_report_json(jb::sweep(cfg, param, values));
            std::ofstream out(c_sweep.out + "/" + cfg.name + "_sweep.json");
            out << repj.dump(2) << "\n";
            std::cout << repj.dump(2) << "\n";
            return 0;
        }
        if (*enc) {
            jb::CsiTrace tr = jb::load_trace(trace_path);
            jb::AfParams af;
            if (!c_enc.config.empty()) af = jb::load_scenario(c_enc.config).af;
            jb::Fingerprint f = jb::fingerprint(tr, af);
            std::string bits = jb::bits_to_string(f.bits);
            if (fp_out.empty()) {
                std::cout << bits << "\n";
            } else {
                std::ofstream out(fp_out);
                out << bits << "\n";
            }
            return 0;
        }
        if (*rep) {
            std::ifstream in(report_path);
            if (!in) throw jb::ParseError("cannot open report: " + report_path);
            nlohmann::json j = nlohmann::json::parse(in);
            std::cout << j.dump(2) << "\n";
            return 0;
        }
    } catch (const jb::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const jb::UnknownParam& e) {
        std::cerr << "sweep error: " << e.what() << "\n";
        return 2;
    } catch (const jb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

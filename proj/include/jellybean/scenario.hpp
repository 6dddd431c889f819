#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adversary.hpp"
#include "keyagree.hpp"
#include "metrics.hpp"
#include "uph.hpp"

namespace jb {

// ---------------------------------------------------------------------------
// Configuration

struct AdversaryConfig {
    std::string kind;                  // eavesdropper | keylogger | beamSteal | colocated
    std::string id = "M";
    double phi_deg = 20.0;             // eavesdropper: angle off the A->D ray, seen from A
    double range_m = -1.0;             // eavesdropper: A->M distance; <0 means |AD|
    std::string fill = "randomGuess";
    KeyloggerParams keylog;
    Vec2 pos{0.0, 0.0};                // beamSteal / explicit placement
    bool has_pos = false;
};

struct ScenarioConfig {
    std::string name = "scenario";
    uint64_t master_seed = 1;
    double duration_sec = 90.0;
    std::string protocol = "jellybean";  // jellybean | jellybeanPlus
    std::string pair_a = "A";
    std::string pair_d = "D";
    SceneConfig scene;
    ActivityParams activity;
    AfParams af;
    RsCode code{4, 15, 9};
    double epsilon_db = 3.0;   // path discovery margin
    double dwell_sec = 0.05;   // hop dwell time
    std::vector<AdversaryConfig> adversaries;
    std::string sweep_param;
    std::vector<double> sweep_values;
};

namespace scn_detail {

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key,
                                     const std::string& where) {
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError("missing required field '" + key + "' in " + where);
    return *it;
}

inline Vec2 parse_vec2(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError("expected [x, y] for " + where);
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace scn_detail

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    using scn_detail::parse_vec2;
    using scn_detail::require;
    if (!j.is_object()) throw ParseError("scenario config must be a JSON object");
    ScenarioConfig c;
    c.name = j.value("name", c.name);
    c.master_seed = j.value("masterSeed", c.master_seed);
    c.duration_sec = j.value("durationSec", c.duration_sec);
    c.protocol = j.value("protocol", c.protocol);
    if (c.protocol != "jellybean" && c.protocol != "jellybeanPlus")
        throw ParseError("protocol must be 'jellybean' or 'jellybeanPlus', got '" +
                         c.protocol + "'");
    if (c.duration_sec <= 0.0) throw ParseError("durationSec must be > 0");

    const auto& sc = require(j, "scene", "config root");
    for (const auto& nj : require(sc, "nodes", "scene")) {
        Node n;
        n.id = require(nj, "id", "scene.nodes[]").get<std::string>();
        n.pos = parse_vec2(require(nj, "pos", "scene.nodes[]"), "scene.nodes[].pos");
        n.orientation_deg = nj.value("orientationDeg", 0.0);
        c.scene.nodes.push_back(n);
    }
    if (sc.contains("reflectors"))
        for (const auto& rj : sc["reflectors"]) {
            Reflector r;
            r.a = parse_vec2(require(rj, "a", "scene.reflectors[]"), "reflector a");
            r.b = parse_vec2(require(rj, "b", "scene.reflectors[]"), "reflector b");
            r.loss_db = rj.value("lossDb", r.loss_db);
            c.scene.reflectors.push_back(r);
        }
    c.scene.carrier_hz = sc.value("carrierHz", c.scene.carrier_hz);
    c.scene.bandwidth_hz = sc.value("bandwidthHz", c.scene.bandwidth_hz);
    c.scene.subcarriers = sc.value("subcarriers", c.scene.subcarriers);
    c.scene.sector_count = sc.value("sectorCount", c.scene.sector_count);
    c.scene.sector_beamwidth_deg = sc.value("sectorBeamwidthDeg", c.scene.sector_beamwidth_deg);
    c.scene.tx_power_dbm = sc.value("txPowerDbm", c.scene.tx_power_dbm);
    c.scene.noise_floor_dbm = sc.value("noiseFloorDbm", c.scene.noise_floor_dbm);
    c.scene.sensitivity_dbm = sc.value("sensitivityDbm", c.scene.sensitivity_dbm);
    c.scene.antenna_rolloff_deg = sc.value("antennaRolloffDeg", c.scene.antenna_rolloff_deg);
    c.scene.samples_per_probe = sc.value("samplesPerProbe", c.scene.samples_per_probe);
    c.scene.sample_rate = sc.value("sampleRate", c.scene.sample_rate);
    c.scene.subcarrier_jitter = sc.value("subcarrierJitter", c.scene.subcarrier_jitter);

    if (j.contains("pair")) {
        const auto& p = j["pair"];
        if (!p.is_array() || p.size() != 2)
            throw ParseError("pair must be a two-element array of node ids");
        c.pair_a = p[0].get<std::string>();
        c.pair_d = p[1].get<std::string>();
    }
    for (const auto& id : {c.pair_a, c.pair_d}) {
        bool found = false;
        for (const auto& n : c.scene.nodes) found = found || n.id == id;
        if (!found) throw ParseError("pair references unknown node '" + id + "'");
    }

    const auto& ac = require(j, "activity", "config root");
    std::string kind = ac.value("kind", std::string("artificial"));
    if (kind == "artificial") c.activity.kind = ActivityKind::Artificial;
    else if (kind == "daily") c.activity.kind = ActivityKind::Daily;
    else throw ParseError("activity.kind must be 'artificial' or 'daily'");
    c.activity.rate_per_sec = ac.value("ratePerSec", c.activity.rate_per_sec);
    c.activity.duration_min = ac.value("durationMinSec", c.activity.duration_min);
    c.activity.duration_max = ac.value("durationMaxSec", c.activity.duration_max);
    c.activity.attenuation_db = ac.value("attenuationDb", c.activity.attenuation_db);
    c.activity.window_sec = c.duration_sec;
    if (ac.contains("placement")) {
        const auto& pj = ac["placement"];
        std::string mode = pj.value("mode", std::string("path"));
        if (mode == "path") c.activity.placement.mode = DiscPlacement::Mode::Path;
        else if (mode == "box") c.activity.placement.mode = DiscPlacement::Mode::Box;
        else throw ParseError("placement.mode must be 'path' or 'box'");
        if (pj.contains("a")) c.activity.placement.a = parse_vec2(pj["a"], "placement.a");
        if (pj.contains("b")) c.activity.placement.b = parse_vec2(pj["b"], "placement.b");
        c.activity.placement.along_min = pj.value("alongMin", c.activity.placement.along_min);
        c.activity.placement.along_max = pj.value("alongMax", c.activity.placement.along_max);
        c.activity.placement.lateral_jitter =
            pj.value("lateralJitter", c.activity.placement.lateral_jitter);
        c.activity.placement.radius_min = pj.value("radiusMin", c.activity.placement.radius_min);
        c.activity.placement.radius_max = pj.value("radiusMax", c.activity.placement.radius_max);
    } else {
        // default: events scattered along the pairing link
        for (const auto& n : c.scene.nodes) {
            if (n.id == c.pair_a) c.activity.placement.a = n.pos;
            if (n.id == c.pair_d) c.activity.placement.b = n.pos;
        }
    }

    if (j.contains("af")) {
        const auto& aj = j["af"];
        c.af.moving_variance_window_sec =
            aj.value("movingVarianceWindowSec", c.af.moving_variance_window_sec);
        c.af.downsample_factor = aj.value("downsampleFactor", c.af.downsample_factor);
        c.af.lsb_count = aj.value("lsbCount", c.af.lsb_count);
        c.af.threshold_window_sec = aj.value("thresholdWindowSec", c.af.threshold_window_sec);
        c.af.threshold_guard = aj.value("thresholdGuard", c.af.threshold_guard);
        c.af.wavelet_levels = aj.value("waveletLevels", c.af.wavelet_levels);
    }

    if (j.contains("code")) {
        const auto& cj = j["code"];
        c.code.symbol_bits = cj.value("symbolBits", c.code.symbol_bits);
        c.code.n = cj.value("n", c.code.n);
        c.code.k = cj.value("k", c.code.k);
    }
    c.code.validate();

    if (j.contains("uph")) {
        const auto& uj = j["uph"];
        c.epsilon_db = uj.value("epsilonDb", c.epsilon_db);
        c.dwell_sec = uj.value("dwellSec", c.dwell_sec);
    }

    if (j.contains("adversaries"))
        for (const auto& aj : j["adversaries"]) {
            AdversaryConfig a;
            a.kind = scn_detail::require(aj, "kind", "adversaries[]").get<std::string>();
            if (a.kind != "eavesdropper" && a.kind != "keylogger" && a.kind != "beamSteal" &&
                a.kind != "colocated")
                throw ParseError("unknown adversary kind '" + a.kind + "'");
            a.id = aj.value("id", a.id);
            a.phi_deg = aj.value("phiDeg", a.phi_deg);
            a.range_m = aj.value("rangeM", a.range_m);
            a.fill = aj.value("fill", a.fill);
            try {
                parse_fill_strategy(a.fill);  // validate early
            } catch (const InvalidArgs& e) {
                throw ParseError(e.what());
            }
            if (aj.contains("pos")) {
                a.pos = parse_vec2(aj["pos"], "adversaries[].pos");
                a.has_pos = true;
            }
            a.keylog.frame_rate = aj.value("frameRate", a.keylog.frame_rate);
            a.keylog.jitter_frames = aj.value("jitterFrames", a.keylog.jitter_frames);
            a.keylog.bias_min = aj.value("biasMin", a.keylog.bias_min);
            a.keylog.bias_max = aj.value("biasMax", a.keylog.bias_max);
            a.keylog.widen_sec = aj.value("widenSec", a.keylog.widen_sec);
            c.adversaries.push_back(a);
        }

    if (j.contains("sweep")) {
        const auto& sj = j["sweep"];
        c.sweep_param = scn_detail::require(sj, "param", "sweep").get<std::string>();
        for (const auto& v : scn_detail::require(sj, "values", "sweep"))
            c.sweep_values.push_back(v.get<double>());
    }
    return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("JSON parse error in ") + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Results

struct AdversaryResult {
    std::string kind;
    std::string id;
    std::string fill;
    double phi_deg = 0.0;
    double bmr_vs_a = 1.0;
    bool opened = false;             // commitment check passed
    bool mitm_success = false;       // beamSteal only
    size_t uncontrolled_paths = 0;   // beamSteal/jellybeanPlus only
};

struct ScenarioResult {
    std::string name;
    uint64_t seed = 0;
    std::string protocol;
    bool accepted = false;
    double bmr_ad = 1.0;
    size_t bits_a = 0;
    size_t bits_d = 0;
    int event_count = 0;
    double sbr_bits_per_event = 0.0;
    double apen = 0.0;
    double apen_p = 0.0;
    bool apen_valid = false;
    size_t matched_hops = 0;         // jellybeanPlus
    size_t viable_paths = 0;         // jellybeanPlus
    std::vector<AdversaryResult> adversaries;

    // carried along for tooling (dumps, offline encode checks)
    CsiTrace trace_a, trace_d;
    Fingerprint fingerprint_a, fingerprint_d;
};

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    Scene scene = build_scene(cfg.scene);
    ScenarioResult r;
    r.name = cfg.name;
    r.seed = cfg.master_seed;
    r.protocol = cfg.protocol;

    ActivityParams act = cfg.activity;
    act.window_sec = cfg.duration_sec;
    auto schedule = generate_activity_schedule(act, derive_seed(cfg.master_seed, "activity"));

    int sector_a = -1;  // A's transmit sector in the fixed-beam protocol
    UphRun uph_run;
    std::pair<ViableSectorSet, ViableSectorSet> viable;
    HopSequence seq_a, seq_d;
    if (cfg.protocol == "jellybean") {
        auto [sa, sd] = adv_detail::best_sector_pair(scene, cfg.pair_a, cfg.pair_d);
        sector_a = sa;
        auto snd = run_sounding(scene, cfg.pair_a, cfg.pair_d, sa, sd, cfg.duration_sec,
                                schedule, derive_seed(cfg.master_seed, "sounding"));
        r.trace_a = snd.at_a;
        r.trace_d = snd.at_d;
    } else {
        viable = path_discovery(scene, cfg.pair_a, cfg.pair_d, cfg.epsilon_db,
                                derive_seed(cfg.master_seed, "discovery"));
        r.viable_paths = viable.first.sectors.size();
        seq_a = generate_hop_sequence(viable.first, cfg.dwell_sec, cfg.duration_sec,
                                      derive_seed(cfg.master_seed, "hop/a"));
        seq_d = generate_hop_sequence(viable.second, cfg.dwell_sec, cfg.duration_sec,
                                      derive_seed(cfg.master_seed, "hop/d"));
        uph_run = run_uph_sounding(scene, cfg.pair_a, cfg.pair_d, seq_a, seq_d, schedule,
                                   cfg.duration_sec, derive_seed(cfg.master_seed, "uph"));
        r.matched_hops = uph_run.matched_hops;
        r.trace_a = uph_run.at_a;
        r.trace_d = uph_run.at_d;
    }

    // Pairing, kept inline so the commitment is available to replay against
    // the adversaries below. Mirrors pair_devices().
    Fingerprint fa = fingerprint(r.trace_a, cfg.af);
    Fingerprint fd = fingerprint(r.trace_d, cfg.af);
    if (fa.gray_bits != fd.gray_bits) {
        int shared = std::max(fa.gray_bits, fd.gray_bits);
        fa = fingerprint(r.trace_a, cfg.af, shared);
        fd = fingerprint(r.trace_d, cfg.af, shared);
    }
    r.fingerprint_a = fa;
    r.fingerprint_d = fd;
    r.bits_a = fa.bits.size();
    r.bits_d = fd.bits.size();
    r.event_count = fa.event_count;
    if (!fa.bits.empty() && !fd.bits.empty())
        r.bmr_ad = bmr_common_prefix(fa.bits, fd.bits);

    Commitment comm;
    SecretKey key;
    bool committed = false;
    try {
        auto ck = commit(fa, cfg.code, derive_seed(derive_seed(cfg.master_seed, "pair"), "key"));
        comm = ck.first;
        key = ck.second;
        committed = true;
        auto opened = open_commitment(fd, comm, cfg.code);
        r.accepted = opened.has_value() && *opened == key;
    } catch (const FingerprintTooShort&) {
        r.accepted = false;
    }

    try {
        r.sbr_bits_per_event = sbr(fa, schedule, cfg.duration_sec);
    } catch (const NoActivity&) {
    }
    try {
        auto ap = apen(fa.bits, 2);
        r.apen = ap.apen;
        r.apen_p = ap.p_value;
        r.apen_valid = true;
    } catch (const SequenceTooShort&) {
    }

    const Node& node_a = scene.node(cfg.pair_a);
    const Node& node_d = scene.node(cfg.pair_d);
    for (const auto& adv : cfg.adversaries) {
        AdversaryResult ar;
        ar.kind = adv.kind;
        ar.id = adv.id;
        ar.fill = adv.fill;
        ar.phi_deg = adv.phi_deg;
        uint64_t aseed = derive_seed(cfg.master_seed, "adv/" + adv.id + "/" + adv.kind);

        auto try_open = [&](const Fingerprint& fm) {
            if (!committed) return false;
            auto got = open_commitment(fm, comm, cfg.code);
            return got.has_value() && *got == key;
        };

        if (adv.kind == "eavesdropper") {
            if (cfg.protocol != "jellybean")
                throw InvalidConfig("eavesdropper scenario requires the fixed-beam protocol");
            Vec2 dir = node_d.pos - node_a.pos;
            double dist = adv.range_m > 0.0 ? adv.range_m : dir.norm();
            double ang = (angle_deg(dir) + adv.phi_deg) * kPi / 180.0;
            Scene sm = scene;
            Node m;
            m.id = adv.id;
            m.pos = adv.has_pos
                        ? adv.pos
                        : Vec2{node_a.pos.x + dist * std::cos(ang),
                               node_a.pos.y + dist * std::sin(ang)};
            m.orientation_deg = 0.0;
            sm.nodes.push_back(m);
            int m_sector = sm.sector_of(m, angle_deg(node_a.pos - m.pos));
            auto er = eavesdrop(sm, cfg.pair_a, sector_a, adv.id, m_sector, cfg.duration_sec,
                                schedule, cfg.af, parse_fill_strategy(adv.fill), aseed,
                                fa.gray_bits);
            if (!er.fingerprint.bits.empty() && !fa.bits.empty())
                ar.bmr_vs_a = bmr_common_prefix(er.fingerprint.bits, fa.bits);
            ar.opened = try_open(er.fingerprint);
        } else if (adv.kind == "keylogger") {
            Fingerprint fm = keylog_fingerprint(schedule, cfg.duration_sec, scene.sample_rate,
                                                cfg.af, adv.keylog, aseed, fa.gray_bits);
            if (!fm.bits.empty() && !fa.bits.empty())
                ar.bmr_vs_a = bmr_common_prefix(fm.bits, fa.bits);
            ar.opened = try_open(fm);
        } else if (adv.kind == "beamSteal") {
            Scene sm = scene;
            if (!sm.has_node(adv.id)) {
                Node m;
                m.id = adv.id;
                m.pos = adv.has_pos ? adv.pos
                                    : Vec2{(node_a.pos.x + node_d.pos.x) / 2.0,
                                           (node_a.pos.y + node_d.pos.y) / 2.0 + 1.0};
                sm.nodes.push_back(m);
            }
            BeamStealResult bs;
            if (cfg.protocol == "jellybean")
                bs = beam_steal_basic(sm, cfg.pair_a, cfg.pair_d, adv.id, cfg.duration_sec,
                                      schedule, cfg.af, cfg.code, aseed);
            else
                bs = beam_steal_plus(sm, cfg.pair_a, cfg.pair_d, adv.id, cfg.epsilon_db,
                                     cfg.dwell_sec, cfg.duration_sec, schedule, cfg.af,
                                     cfg.code, parse_fill_strategy(adv.fill), aseed);
            ar.mitm_success = bs.succeeded;
            ar.opened = bs.succeeded;
            ar.bmr_vs_a = cfg.protocol == "jellybean" ? bs.bmr_am : bs.bmr_m_vs_a;
            ar.uncontrolled_paths = bs.uncontrolled_paths;
        } else {  // colocated
            if (cfg.protocol != "jellybeanPlus")
                throw InvalidConfig("colocated adversary requires jellybeanPlus");
            auto seq_m = generate_hop_sequence(viable.second, cfg.dwell_sec, cfg.duration_sec,
                                               derive_seed(aseed, "hop"));
            auto cr = colocated_uph_attack(scene, cfg.pair_a, cfg.pair_d, seq_a, seq_m,
                                           uph_run, schedule, cfg.duration_sec, cfg.af,
                                           parse_fill_strategy(adv.fill),
                                           derive_seed(cfg.master_seed, "uph"),
                                           committed ? &comm : nullptr,
                                           committed ? &cfg.code : nullptr,
                                           committed ? &key : nullptr);
            if (!cr.fingerprint_m.bits.empty() && !fa.bits.empty())
                ar.bmr_vs_a = bmr_common_prefix(cr.fingerprint_m.bits, fa.bits);
            ar.opened = cr.key_recovered;
        }
        r.adversaries.push_back(ar);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Reports (deterministic formatting: %.9g everywhere)

namespace scn_detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace scn_detail

inline nlohmann::json report_json(const ScenarioResult& r) {
    using scn_detail::fmt;
    nlohmann::json j;
    j["name"] = r.name;
    j["masterSeed"] = r.seed;
    j["protocol"] = r.protocol;
    j["accepted"] = r.accepted;
    j["bmrAD"] = fmt(r.bmr_ad);
    j["bitsA"] = r.bits_a;
    j["bitsD"] = r.bits_d;
    j["eventCount"] = r.event_count;
    j["sbrBitsPerEvent"] = fmt(r.sbr_bits_per_event);
    j["apen"] = r.apen_valid ? fmt(r.apen) : "n/a";
    j["apenP"] = r.apen_valid ? fmt(r.apen_p) : "n/a";
    if (r.protocol == "jellybeanPlus") {
        j["matchedHops"] = r.matched_hops;
        j["viablePaths"] = r.viable_paths;
    }
    j["adversaries"] = nlohmann::json::array();
    for (const auto& a : r.adversaries) {
        nlohmann::json aj;
        aj["kind"] = a.kind;
        aj["id"] = a.id;
        aj["fill"] = a.fill;
        aj["phiDeg"] = fmt(a.phi_deg);
        aj["bmrVsA"] = fmt(a.bmr_vs_a);
        aj["opened"] = a.opened;
        if (a.kind == "beamSteal") {
            aj["mitmSuccess"] = a.mitm_success;
            aj["uncontrolledPaths"] = a.uncontrolled_paths;
        }
        j["adversaries"].push_back(aj);
    }
    return j;
}

inline std::string report_csv_header() {
    return "name,masterSeed,protocol,accepted,bmrAD,bitsA,bitsD,eventCount,"
           "sbrBitsPerEvent,apen,apenP,matchedHops,advKind,advBmrVsA,advOpened\n";
}

inline std::string report_csv_row(const ScenarioResult& r) {
    using scn_detail::fmt;
    std::ostringstream os;
    auto base = [&](const std::string& adv_kind, const std::string& adv_bmr,
                    const std::string& adv_opened) {
        os << r.name << ',' << r.seed << ',' << r.protocol << ',' << (r.accepted ? 1 : 0)
           << ',' << fmt(r.bmr_ad) << ',' << r.bits_a << ',' << r.bits_d << ','
           << r.event_count << ',' << fmt(r.sbr_bits_per_event) << ','
           << (r.apen_valid ? fmt(r.apen) : "n/a") << ','
           << (r.apen_valid ? fmt(r.apen_p) : "n/a") << ',' << r.matched_hops << ','
           << adv_kind << ',' << adv_bmr << ',' << adv_opened << '\n';
    };
    if (r.adversaries.empty()) {
        base("", "", "");
    } else {
        for (const auto& a : r.adversaries)
            base(a.kind, fmt(a.bmr_vs_a), a.opened ? "1" : "0");
    }
    return os.str();
}

inline void write_reports(const ScenarioResult& r, const std::string& out_dir) {
    {
        std::ofstream out(out_dir + "/" + r.name + "_report.json");
        if (!out) throw Error("cannot write report to " + out_dir);
        out << report_json(r).dump(2) << "\n";
    }
    std::ofstream csv(out_dir + "/" + r.name + "_report.csv");
    csv << report_csv_header() << report_csv_row(r);
}

// ---------------------------------------------------------------------------
// Parameter sweeps

struct SweepPoint {
    double value = 0.0;
    ScenarioResult result;
};

struct SweepReport {
    std::string param;
    std::vector<SweepPoint> points;
    // pick the smallest value with BMR < 0.2 and ApEn p > 0.01
    double selected_value = 0.0;
    bool selection_found = false;
    bool bmr_non_increasing = true;  // trend over increasing values
};

inline void apply_sweep_param(ScenarioConfig& cfg, const std::string& param, double v) {
    if (param == "movingVarianceWindowSec") cfg.af.moving_variance_window_sec = v;
    else if (param == "downsampleFactor") cfg.af.downsample_factor = int(std::lround(v));
    else if (param == "lsbCount") cfg.af.lsb_count = int(std::lround(v));
    else if (param == "thresholdGuard") cfg.af.threshold_guard = v;
    else if (param == "dwellSec") cfg.dwell_sec = v;
    else if (param == "epsilonDb") cfg.epsilon_db = v;
    else throw UnknownParam("sweep parameter '" + param + "' is not whitelisted");
}

inline SweepReport sweep(const ScenarioConfig& base, const std::string& param,
                         const std::vector<double>& values) {
    if (values.empty()) throw UnknownParam("sweep value list is empty");
    SweepReport rep;
    rep.param = param;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double prev_bmr = -1.0;
    for (double v : sorted) {
        ScenarioConfig cfg = base;
        apply_sweep_param(cfg, param, v);
        cfg.master_seed = derive_seed(base.master_seed, "sweep/" + param + "/" +
                                                            scn_detail::fmt(v));
        SweepPoint pt;
        pt.value = v;
        pt.result = run_scenario(cfg);
        if (!rep.selection_found && pt.result.bmr_ad < 0.2 &&
            (!pt.result.apen_valid || pt.result.apen_p > 0.01)) {
            rep.selection_found = true;
            rep.selected_value = v;
        }
        if (prev_bmr >= 0.0 && pt.result.bmr_ad > prev_bmr + 1e-12)
            rep.bmr_non_increasing = false;
        prev_bmr = pt.result.bmr_ad;
        rep.points.push_back(std::move(pt));
    }
    return rep;
}

inline nlohmann::json sweep_report_json(const SweepReport& rep) {
    using scn_detail::fmt;
    nlohmann::json j;
    j["param"] = rep.param;
    j["selectionFound"] = rep.selection_found;
    if (rep.selection_found) j["selectedValue"] = fmt(rep.selected_value);
    j["bmrNonIncreasing"] = rep.bmr_non_increasing;
    j["points"] = nlohmann::json::array();
    for (const auto& p : rep.points) {
        nlohmann::json pj;
        pj["value"] = fmt(p.value);
        pj["bmrAD"] = fmt(p.result.bmr_ad);
        pj["accepted"] = p.result.accepted;
        pj["apenP"] = p.result.apen_valid ? fmt(p.result.apen_p) : "n/a";
        j["points"].push_back(pj);
    }
    return j;
}

}  // namespace jb

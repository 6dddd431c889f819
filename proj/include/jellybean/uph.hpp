#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "jellybean/common.hpp"
#include "jellybean/rng.hpp"
#include "jellybean/simenv.hpp"

namespace jb {

struct ViableSectorSet {
    std::string owner;
    std::vector<int> sectors;                 // ascending
    std::map<int, double> per_sector_rss;     // best counterpart sweep, dBm
};

struct HopSequence {
    double dwell_time_sec = 0.05;
    std::vector<int> entries;
    uint64_t seed = 0;
};

struct DiscoveryTiming {
    int probe_bytes = 26;
    int ack_bytes = 28;
    double sbifs_sec = 1e-6;
    double rate_bps = 160e6;
    int sector_count = 12;
    // Per-hop switching overhead in units of SBIFS. The 802.11ad frame
    // times alone do not account for the full sweep budget; the default is
    // tuned so the stock parameters land on 5.12 ms end to end.
    double switch_overhead_sbifs = 31.5555555555556;
};

// Round-structured discovery: A fixes a sector per round while D sweeps all
// sectors in random order; a sector pair is viable when the bidirectional
// exchange clears sensitivity + epsilon on both ends. When several D
// sectors succeed against one A sector, only the strongest is kept.
inline std::pair<ViableSectorSet, ViableSectorSet>
path_discovery(const Scene& s, const std::string& a_id, const std::string& d_id,
               double epsilon_db, uint64_t seed) {
    ViableSectorSet va{a_id, {}, {}}, vd{d_id, {}, {}};
    Rng rng(derive_seed(seed, "discovery/" + d_id));
    const double floor_dbm = s.sensitivity_dbm + epsilon_db;

    for (int sa = 0; sa < s.sector_count; ++sa) {
        std::vector<int> order(s.sector_count);
        std::iota(order.begin(), order.end(), 0);
        for (int i = s.sector_count - 1; i > 0; --i)
            std::swap(order[i], order[rng.uniform_int(uint64_t(i) + 1)]);

        int best_sd = -1;
        double best_rss = kNegInfDbm;
        for (int sd : order) {
            double up = rss(s, d_id, sd, a_id, sa, 0.0);    // D's probe at A
            double down = rss(s, a_id, sa, d_id, sd, 0.0);  // A's reply at D
            if (up < floor_dbm || down < floor_dbm) continue;
            if (down > best_rss) {
                best_rss = down;
                best_sd = sd;
            }
        }
        if (best_sd >= 0) {
            va.sectors.push_back(sa);
            va.per_sector_rss[sa] = rss(s, d_id, best_sd, a_id, sa, 0.0);
            if (std::find(vd.sectors.begin(), vd.sectors.end(), best_sd) == vd.sectors.end()) {
                vd.sectors.push_back(best_sd);
                vd.per_sector_rss[best_sd] = best_rss;
            } else {
                vd.per_sector_rss[best_sd] = std::max(vd.per_sector_rss[best_sd], best_rss);
            }
        }
    }
    std::sort(va.sectors.begin(), va.sectors.end());
    std::sort(vd.sectors.begin(), vd.sectors.end());
    if (va.sectors.empty())
        throw NoViablePath("path discovery found no viable sector pair");
    return {va, vd};
}

inline HopSequence generate_hop_sequence(const ViableSectorSet& v, double dwell_time_sec,
                                         double duration_sec, uint64_t seed) {
    if (dwell_time_sec <= 0.0) throw InvalidDwell("dwell time must be > 0");
    if (v.sectors.empty()) throw InvalidArgs("empty viable sector set");
    HopSequence h;
    h.dwell_time_sec = dwell_time_sec;
    h.seed = seed;
    size_t slots = size_t(std::ceil(duration_sec / dwell_time_sec));
    h.entries.resize(slots);
    Rng rng(seed);
    for (auto& e : h.entries) e = v.sectors[rng.uniform_int(v.sectors.size())];
    return h;
}

struct UphRun {
    CsiTrace at_a;
    CsiTrace at_d;
    size_t matched_hops = 0;          // Q
    std::vector<uint8_t> slot_matched;
    std::vector<int> slot_path_sector_a;  // A's sector per slot (for adversaries)
    size_t slot_samples = 0;
    // Full-duration soundings per distinct matched (A-sector, D-sector)
    // pair; adversary models stitch their own views out of these.
    std::map<std::pair<int, int>, SoundingResult> pair_soundings;
};

// Uncoordinated hopping over a shared slot clock. Probes are exchanged only
// on slots whose sector pair is joined by a path; everything else becomes a
// validity gap on both sides alike. A matched slot must fit two probing
// rounds to count.
inline UphRun run_uph_sounding(const Scene& s, const std::string& a_id,
                               const std::string& d_id, const HopSequence& seq_a,
                               const HopSequence& seq_d,
                               const std::vector<ActivityEvent>& schedule,
                               double duration, uint64_t seed) {
    if (seq_a.dwell_time_sec != seq_d.dwell_time_sec)
        throw InvalidParams("hop sequences must share the slot clock");
    const Node& a = s.node(a_id);
    const Node& d = s.node(d_id);
    auto paths = enumerate_paths(s, a_id, d_id);

    const size_t slot_samples = size_t(std::lround(seq_a.dwell_time_sec * s.sample_rate));
    const size_t min_samples = 2 * size_t(s.samples_per_probe);
    const size_t slots = std::min(seq_a.entries.size(), seq_d.entries.size());

    UphRun run;
    run.slot_samples = slot_samples;
    run.slot_matched.assign(slots, 0);
    run.slot_path_sector_a.assign(slots, -1);
    for (size_t i = 0; i < slots; ++i) {
        bool joined = false;
        for (const auto& p : paths)
            if (std::isfinite(path_gain_db(s, a, seq_a.entries[i], d, seq_d.entries[i], p)))
                joined = true;
        if (joined && slot_samples >= min_samples) {
            run.slot_matched[i] = 1;
            run.slot_path_sector_a[i] = seq_a.entries[i];
            ++run.matched_hops;
        }
    }

    // Synthesize per distinct matched sector pair over the full duration,
    // then stitch slots together; wobble/noise streams stay deterministic
    // per pair.
    std::string link = a_id < d_id ? a_id + "-" + d_id : d_id + "-" + a_id;
    auto& per_pair = run.pair_soundings;
    for (size_t i = 0; i < slots; ++i) {
        if (!run.slot_matched[i]) continue;
        std::pair<int, int> key{seq_a.entries[i], seq_d.entries[i]};
        if (per_pair.count(key)) continue;
        uint64_t pseed = derive_seed(seed, "uph/" + link + "/" + std::to_string(key.first) +
                                               "-" + std::to_string(key.second));
        per_pair.emplace(key, run_sounding(s, a_id, d_id, key.first, key.second,
                                           duration, schedule, pseed));
    }

    auto stitch = [&](bool at_a) {
        CsiTrace tr;
        bool init = false;
        for (size_t i = 0; i < slots; ++i) {
            if (!run.slot_matched[i]) continue;
            const auto& src0 = per_pair.at({seq_a.entries[i], seq_d.entries[i]});
            const CsiTrace& src = at_a ? src0.at_a : src0.at_d;
            if (!init) {
                tr = src;
                std::fill(tr.samples.begin(), tr.samples.end(), std::complex<float>{});
                std::fill(tr.validity.begin(), tr.validity.end(), 0);
                init = true;
            }
            size_t lo = i * slot_samples;
            size_t hi = std::min(lo + slot_samples, size_t(tr.width()));
            for (size_t t = lo; t < hi; ++t) {
                tr.validity[t] = src.validity[t];
                for (int k = 0; k < tr.subcarriers; ++k)
                    tr.at(k, int(t)) = src.at(k, int(t));
            }
        }
        if (!init) {
            // no matched slot: an all-invalid trace with the right shape
            tr.subcarriers = s.subcarriers;
            tr.samples_per_probe = s.samples_per_probe;
            tr.probing_rounds = int(duration * s.sample_rate) / s.samples_per_probe;
            tr.sample_rate = s.sample_rate;
            tr.owner = at_a ? a_id : d_id;
            tr.samples.assign(size_t(tr.subcarriers) * tr.width(), {});
            tr.validity.assign(tr.width(), 0);
        }
        tr.owner = at_a ? a_id : d_id;
        return tr;
    };
    run.at_a = stitch(true);
    run.at_d = stitch(false);
    return run;
}

// Deterministic discovery-phase duration: sectorCount^2 hops of two probes,
// one ACK and a switching overhead each.
inline double discovery_time(const DiscoveryTiming& t) {
    if (t.probe_bytes <= 0 || t.ack_bytes <= 0 || t.rate_bps <= 0 || t.sector_count <= 0 ||
        t.sbifs_sec < 0)
        throw InvalidParams("discovery timing parameters must be positive");
    double per_hop = (2.0 * t.probe_bytes + t.ack_bytes) * 8.0 / t.rate_bps +
                     t.switch_overhead_sbifs * t.sbifs_sec;
    return double(t.sector_count) * double(t.sector_count) * per_hop;
}

}  // namespace jb

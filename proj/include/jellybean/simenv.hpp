#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jellybean/common.hpp"
#include "jellybean/rng.hpp"
#include "jellybean/trace.hpp"

namespace jb {

struct Node {
    std::string id;
    Vec2 pos;
    double orientation_deg = 0.0;  // angle of the lower edge of sector 0
};

struct Reflector {
    Vec2 a, b;
    double loss_db = 10.0;  // per-reflection loss
};

struct Scene {
    std::vector<Node> nodes;
    std::vector<Reflector> reflectors;
    double carrier_hz = 28e9;
    double bandwidth_hz = 5e6;
    int subcarriers = 52;                  // K
    int sector_count = 12;
    double sector_beamwidth_deg = 30.0;
    double tx_power_dbm = 30.0;
    double noise_floor_dbm = -63.0;
    double sensitivity_dbm = -78.0;
    // 0 = ideal sectored pattern; > 0 enables a raised-cosine rolloff of
    // this angular width past the sector edge.
    double antenna_rolloff_deg = 0.0;
    int samples_per_probe = 60;            // alpha
    double sample_rate = 3100.0;           // CSI samples per subcarrier per second
    double subcarrier_jitter = 0.01;       // relative amplitude wobble
    uint64_t rng_seed = 1;

    const Node& node(const std::string& id) const {
        for (const auto& n : nodes)
            if (n.id == id) return n;
        throw InvalidConfig("unknown node id: " + id);
    }

    bool has_node(const std::string& id) const {
        for (const auto& n : nodes)
            if (n.id == id) return true;
        return false;
    }

    // Unique sector whose angular span contains the given absolute angle.
    int sector_of(const Node& n, double abs_angle_deg) const {
        double rel = wrap_deg(abs_angle_deg - n.orientation_deg);
        int s = int(rel / sector_beamwidth_deg);
        return s >= sector_count ? sector_count - 1 : s;
    }

    double sector_center_deg(const Node& n, int sector) const {
        return wrap_deg(n.orientation_deg + (sector + 0.5) * sector_beamwidth_deg);
    }

    // Antenna gain (dB) of `sector` toward `abs_angle_deg`. 0 dB in-sector,
    // raised-cosine transition when rolloff is enabled, -inf beyond.
    double sector_gain_db(const Node& n, int sector, double abs_angle_deg) const {
        // In-sector is decided by the half-open sector span (sector_of), so a
        // boundary angle belongs to exactly one sector.
        if (sector_of(n, abs_angle_deg) == sector) return 0.0;
        if (antenna_rolloff_deg <= 0.0) return kNegInfDbm;
        double off = ang_diff_deg(abs_angle_deg, sector_center_deg(n, sector));
        double beyond = std::max(0.0, off - sector_beamwidth_deg / 2.0);
        if (beyond >= antenna_rolloff_deg) return kNegInfDbm;
        double amp = 0.5 * (1.0 + std::cos(kPi * beyond / antenna_rolloff_deg));
        return 20.0 * std::log10(std::max(amp, 1e-12));
    }
};

enum class PathKind { LoS, Reflected };

struct PropagationPath {
    PathKind kind = PathKind::LoS;
    std::vector<Vec2> vertices;  // tx, [reflection point], rx
    double length_m = 0.0;
    double base_loss_db = 0.0;
    int tx_sector = -1;
    int rx_sector = -1;
};

enum class ActivityKind { Artificial, Daily };

struct ActivityEvent {
    double start = 0.0;     // seconds
    double duration = 0.0;  // seconds
    Vec2 center;            // blocked region disc
    double radius = 0.0;
    double attenuation_db = 20.0;
    ActivityKind kind = ActivityKind::Artificial;

    bool active_at(double t) const { return t >= start && t < start + duration; }
};

// ---------------------------------------------------------------------------
// Scene construction

struct SceneConfig {
    std::vector<Node> nodes;
    std::vector<Reflector> reflectors;
    double carrier_hz = 28e9;
    double bandwidth_hz = 5e6;
    int subcarriers = 52;
    int sector_count = 12;
    double sector_beamwidth_deg = 30.0;
    double tx_power_dbm = 30.0;
    double noise_floor_dbm = -63.0;
    double sensitivity_dbm = -78.0;
    double antenna_rolloff_deg = 0.0;
    int samples_per_probe = 60;
    double sample_rate = 3100.0;
    double subcarrier_jitter = 0.01;
    uint64_t rng_seed = 1;
};

inline Scene build_scene(const SceneConfig& cfg) {
    if (cfg.subcarriers < 2)
        throw InvalidConfig("subcarrier count must be >= 2");
    if (std::fabs(cfg.sector_count * cfg.sector_beamwidth_deg - 360.0) > 1e-9)
        throw InvalidConfig("sectorCount x beamwidth must cover 360 degrees exactly");
    if (cfg.nodes.empty())
        throw InvalidConfig("scene needs at least one node");
    for (const auto& n : cfg.nodes) {
        if (!std::isfinite(n.pos.x) || !std::isfinite(n.pos.y))
            throw InvalidConfig("node position must be finite: " + n.id);
        for (const auto& m : cfg.nodes)
            if (&n != &m && n.id == m.id)
                throw InvalidConfig("duplicate node id: " + n.id);
    }
    for (const auto& r : cfg.reflectors) {
        if (distance(r.a, r.b) < 1e-9)
            throw InvalidConfig("degenerate reflector segment");
        for (const auto& n : cfg.nodes)
            if (point_segment_distance(n.pos, r.a, r.b) < 1e-6)
                throw InvalidConfig("reflector intersects node " + n.id);
    }
    Scene s;
    s.nodes = cfg.nodes;
    s.reflectors = cfg.reflectors;
    s.carrier_hz = cfg.carrier_hz;
    s.bandwidth_hz = cfg.bandwidth_hz;
    s.subcarriers = cfg.subcarriers;
    s.sector_count = cfg.sector_count;
    s.sector_beamwidth_deg = cfg.sector_beamwidth_deg;
    s.tx_power_dbm = cfg.tx_power_dbm;
    s.noise_floor_dbm = cfg.noise_floor_dbm;
    s.sensitivity_dbm = cfg.sensitivity_dbm;
    s.antenna_rolloff_deg = cfg.antenna_rolloff_deg;
    s.samples_per_probe = cfg.samples_per_probe;
    s.sample_rate = cfg.sample_rate;
    s.subcarrier_jitter = cfg.subcarrier_jitter;
    s.rng_seed = cfg.rng_seed;
    return s;
}

// ---------------------------------------------------------------------------
// Path enumeration

inline double friis_loss_db(double dist_m, double carrier_hz) {
    double lambda = kSpeedOfLight / carrier_hz;
    return 20.0 * std::log10(4.0 * kPi * std::max(dist_m, 1e-3) / lambda);
}

namespace detail {

// True if any reflector other than `skip` properly crosses segment [a, b].
inline bool segment_occluded(const Scene& s, Vec2 a, Vec2 b, const Reflector* skip) {
    for (const auto& r : s.reflectors) {
        if (&r == skip) continue;
        if (segments_intersect(a, b, r.a, r.b)) return true;
    }
    return false;
}

inline std::optional<Vec2> mirror_point(Vec2 p, const Reflector& r) {
    Vec2 d = r.b - r.a;
    double len2 = d.dot(d);
    double t = (p - r.a).dot(d) / len2;
    Vec2 proj = r.a + d * t;
    return Vec2{2.0 * proj.x - p.x, 2.0 * proj.y - p.y};
}

}  // namespace detail

// LoS path (unless permanently occluded by a reflector) plus one
// single-bounce image path per reflector; sorted by base loss ascending.
inline std::vector<PropagationPath> enumerate_paths(const Scene& s,
                                                    const std::string& a_id,
                                                    const std::string& d_id) {
    const Node& a = s.node(a_id);
    const Node& d = s.node(d_id);
    std::vector<PropagationPath> out;

    if (!detail::segment_occluded(s, a.pos, d.pos, nullptr)) {
        PropagationPath p;
        p.kind = PathKind::LoS;
        p.vertices = {a.pos, d.pos};
        p.length_m = distance(a.pos, d.pos);
        p.base_loss_db = friis_loss_db(p.length_m, s.carrier_hz);
        p.tx_sector = s.sector_of(a, angle_deg(d.pos - a.pos));
        p.rx_sector = s.sector_of(d, angle_deg(a.pos - d.pos));
        out.push_back(std::move(p));
    }

    for (const auto& r : s.reflectors) {
        auto img = detail::mirror_point(a.pos, r);
        if (!img) continue;
        // Intersection of image->rx ray with the reflector segment.
        Vec2 dir = d.pos - *img;
        Vec2 rd = r.b - r.a;
        double denom = dir.cross(rd);
        if (std::fabs(denom) < 1e-12) continue;
        double t = (r.a - *img).cross(rd) / denom;   // along image->rx
        double u = (r.a - *img).cross(dir) / denom;  // along reflector
        if (t <= 0.0 || t >= 1.0 || u < 0.0 || u > 1.0) continue;
        Vec2 refl = *img + dir * t;
        if (detail::segment_occluded(s, a.pos, refl, &r)) continue;
        if (detail::segment_occluded(s, refl, d.pos, &r)) continue;
        PropagationPath p;
        p.kind = PathKind::Reflected;
        p.vertices = {a.pos, refl, d.pos};
        p.length_m = distance(a.pos, refl) + distance(refl, d.pos);
        p.base_loss_db = friis_loss_db(p.length_m, s.carrier_hz) + r.loss_db;
        p.tx_sector = s.sector_of(a, angle_deg(refl - a.pos));
        p.rx_sector = s.sector_of(d, angle_deg(refl - d.pos));
        out.push_back(std::move(p));
    }

    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return x.base_loss_db < y.base_loss_db;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Blockage and RSS

inline bool event_blocks_path(const ActivityEvent& ev, const PropagationPath& p) {
    for (size_t i = 0; i + 1 < p.vertices.size(); ++i)
        if (point_segment_distance(ev.center, p.vertices[i], p.vertices[i + 1]) < ev.radius)
            return true;
    return false;
}

inline double path_attenuation_db(const PropagationPath& p,
                                  const std::vector<ActivityEvent>& schedule,
                                  double t) {
    double atten = 0.0;
    for (const auto& ev : schedule) {
        if (ev.start > t) break;  // schedule sorted by start time
        if (ev.active_at(t) && event_blocks_path(ev, p))
            atten += ev.attenuation_db;
    }
    return atten;
}

// Directional gain of a concrete path for a chosen tx/rx sector pair, or
// -inf when either end does not illuminate it.
inline double path_gain_db(const Scene& s, const Node& tx, int tx_sector,
                           const Node& rx, int rx_sector, const PropagationPath& p) {
    double dep = angle_deg(p.vertices[1] - p.vertices[0]);
    double arr = angle_deg(p.vertices[p.vertices.size() - 2] - p.vertices.back());
    double g_tx = s.sector_gain_db(tx, tx_sector, dep);
    double g_rx = s.sector_gain_db(rx, rx_sector, arr);
    if (!std::isfinite(g_tx) || !std::isfinite(g_rx)) return kNegInfDbm;
    return -p.base_loss_db + g_tx + g_rx;
}

// Received power in dBm over all paths joining the sector pair at time t;
// -inf sentinel when no path does.
inline double rss(const Scene& s, const std::string& tx_id, int tx_sector,
                  const std::string& rx_id, int rx_sector, double t,
                  const std::vector<ActivityEvent>& schedule = {}) {
    if (tx_sector < 0 || tx_sector >= s.sector_count ||
        rx_sector < 0 || rx_sector >= s.sector_count)
        throw InvalidArgs("sector index out of range");
    const Node& tx = s.node(tx_id);
    const Node& rx = s.node(rx_id);
    double total_mw = 0.0;
    for (const auto& p : enumerate_paths(s, tx_id, rx_id)) {
        double g = path_gain_db(s, tx, tx_sector, rx, rx_sector, p);
        if (!std::isfinite(g)) continue;
        double atten = 0.0;
        for (const auto& ev : schedule)
            if (ev.active_at(t) && event_blocks_path(ev, p)) atten += ev.attenuation_db;
        total_mw += db_to_lin_pow(s.tx_power_dbm + g - atten);
    }
    return total_mw > 0.0 ? lin_pow_to_db(total_mw) : kNegInfDbm;
}

// ---------------------------------------------------------------------------
// Activity schedule generation

// How event discs are placed. "Path" scatters them along a segment (hand
// waving near an antenna, walking across a link); "Box" scatters them
// uniformly over a rectangle.
struct DiscPlacement {
    enum class Mode { Path, Box } mode = Mode::Path;
    Vec2 a, b;                 // path endpoints, or box corners (lo, hi)
    double along_min = 0.05;   // fraction of the a->b segment (Path mode)
    double along_max = 0.95;
    double lateral_jitter = 0.05;  // meters, perpendicular offset (Path mode)
    double radius_min = 0.06;
    double radius_max = 0.10;
};

struct ActivityParams {
    ActivityKind kind = ActivityKind::Artificial;
    double rate_per_sec = 0.2;      // Poisson arrival rate
    double duration_min = 0.08;     // dwell per crossing, seconds
    double duration_max = 0.10;
    double attenuation_db = 20.0;
    double window_sec = 90.0;
    DiscPlacement placement;
};

inline std::vector<ActivityEvent> generate_activity_schedule(const ActivityParams& p,
                                                             uint64_t seed) {
    if (p.rate_per_sec <= 0.0) throw InvalidParams("activity rate must be > 0");
    if (p.duration_min <= 0.0 || p.duration_max < p.duration_min)
        throw InvalidParams("invalid duration range");
    if (p.attenuation_db <= 0.0) throw InvalidParams("attenuation must be > 0");
    if (p.window_sec <= 0.0) throw InvalidParams("window must be > 0");

    Rng rng(seed);
    std::vector<ActivityEvent> out;
    double t = 0.0;
    while (true) {
        t += rng.exponential(p.rate_per_sec);
        if (t >= p.window_sec) break;
        ActivityEvent ev;
        ev.start = t;
        ev.duration = rng.uniform(p.duration_min, p.duration_max);
        ev.attenuation_db = p.attenuation_db;
        ev.kind = p.kind;
        const auto& pl = p.placement;
        if (pl.mode == DiscPlacement::Mode::Path) {
            Vec2 d = pl.b - pl.a;
            double len = d.norm();
            Vec2 unit = len > 0 ? d * (1.0 / len) : Vec2{1, 0};
            Vec2 perp{-unit.y, unit.x};
            double along = rng.uniform(pl.along_min, pl.along_max);
            double lat = rng.uniform(-pl.lateral_jitter, pl.lateral_jitter);
            ev.center = pl.a + d * along + perp * lat;
        } else {
            ev.center = {rng.uniform(pl.a.x, pl.b.x), rng.uniform(pl.a.y, pl.b.y)};
        }
        ev.radius = rng.uniform(pl.radius_min, pl.radius_max);
        out.push_back(ev);
    }
    return out;  // arrivals are generated in time order
}

// ---------------------------------------------------------------------------
// CSI synthesis

namespace detail {

// Step-function attenuation timeline for one path: boundaries where the
// active-event set changes, so the sounding loop touches events O(#events)
// times instead of per sample.
struct AttenTimeline {
    std::vector<double> times;   // boundary instants, ascending, starts at 0
    std::vector<double> atten;   // dB, value on [times[i], times[i+1])

    double value_at(double t) const {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        size_t idx = size_t(it - times.begin());
        return idx == 0 ? 0.0 : atten[idx - 1];
    }
};

inline AttenTimeline build_atten_timeline(const PropagationPath& p,
                                          const std::vector<ActivityEvent>& schedule,
                                          double duration) {
    std::vector<std::pair<double, double>> deltas;  // (time, +/- atten)
    for (const auto& ev : schedule) {
        if (ev.start >= duration) continue;
        if (!event_blocks_path(ev, p)) continue;
        deltas.emplace_back(ev.start, ev.attenuation_db);
        deltas.emplace_back(ev.start + ev.duration, -ev.attenuation_db);
    }
    std::sort(deltas.begin(), deltas.end());
    AttenTimeline tl;
    tl.times.push_back(0.0);
    tl.atten.push_back(0.0);
    double cur = 0.0;
    for (auto& [t, d] : deltas) {
        cur += d;
        if (t <= 0.0) { tl.atten[0] = cur; continue; }
        if (t == tl.times.back()) {
            tl.atten.back() = cur;
        } else {
            tl.times.push_back(t);
            tl.atten.push_back(cur);
        }
    }
    return tl;
}

struct PathChannel {
    std::vector<std::complex<double>> gain;  // per subcarrier, linear sqrt(mW)
    AttenTimeline atten;
};

// Synthesizes the trace received at `rx` while `tx` transmits toward
// tx_sector and rx listens on rx_sector. The channel wobble stream is
// derived from channel_seed, so the two directions of a reciprocal link
// can share it while receiver noise stays independent.
inline CsiTrace synth_rx_trace(const Scene& s,
                               const std::string& tx_id, int tx_sector,
                               const std::string& rx_id, int rx_sector,
                               double duration,
                               const std::vector<ActivityEvent>& schedule,
                               uint64_t channel_seed, uint64_t noise_seed) {
    const Node& tx = s.node(tx_id);
    const Node& rx = s.node(rx_id);
    const int K = s.subcarriers;
    const int alpha = s.samples_per_probe;
    const int rounds = int(duration * s.sample_rate) / alpha;
    const int width = alpha * rounds;

    std::vector<PathChannel> chans;
    for (const auto& p : enumerate_paths(s, tx_id, rx_id)) {
        double g = path_gain_db(s, tx, tx_sector, rx, rx_sector, p);
        if (!std::isfinite(g)) continue;
        PathChannel pc;
        pc.gain.resize(K);
        double amp = db_to_lin_amp(s.tx_power_dbm + g);
        for (int k = 0; k < K; ++k) {
            double fk = s.carrier_hz - s.bandwidth_hz / 2.0 +
                        (k + 0.5) * s.bandwidth_hz / K;
            double phase = -2.0 * kPi * std::fmod(fk * p.length_m / kSpeedOfLight, 1.0);
            pc.gain[k] = std::polar(amp, phase);
        }
        pc.atten = build_atten_timeline(p, schedule, duration);
        chans.push_back(std::move(pc));
    }

    CsiTrace tr;
    tr.subcarriers = K;
    tr.samples_per_probe = alpha;
    tr.probing_rounds = rounds;
    tr.sample_rate = s.sample_rate;
    tr.owner = rx_id;
    tr.samples.assign(size_t(K) * width, {});
    tr.validity.assign(width, 0);
    if (chans.empty()) return tr;  // fully invalid trace

    Rng chan_rng(channel_seed);
    Rng noise_rng(noise_seed);
    const double noise_sigma = db_to_lin_amp(s.noise_floor_dbm) / std::sqrt(2.0);
    const double sens_mw = db_to_lin_pow(s.sensitivity_dbm);

    // AR(1) per-subcarrier amplitude wobble, updated in coarse blocks.
    constexpr int kWobbleBlock = 64;
    const double rho = 0.98;
    std::vector<double> wobble(K, 0.0);
    for (auto& w : wobble) w = chan_rng.normal();

    std::vector<size_t> atten_idx(chans.size(), 0);
    std::vector<double> blk_amp(chans.size(), 1.0);  // linear blockage factor
    std::vector<std::complex<double>> base(K);

    bool dirty = true;
    for (int t = 0; t < width; ++t) {
        double tsec = t / s.sample_rate;
        for (size_t c = 0; c < chans.size(); ++c) {
            const auto& tl = chans[c].atten;
            while (atten_idx[c] + 1 < tl.times.size() && tl.times[atten_idx[c] + 1] <= tsec) {
                ++atten_idx[c];
                dirty = true;
            }
        }
        if (t % kWobbleBlock == 0) {
            for (auto& w : wobble)
                w = rho * w + std::sqrt(1.0 - rho * rho) * chan_rng.normal();
            dirty = true;
        }
        if (dirty) {
            double sig_mw = 0.0;
            for (size_t c = 0; c < chans.size(); ++c)
                blk_amp[c] = db_to_lin_amp(-chans[c].atten.atten[atten_idx[c]]);
            for (int k = 0; k < K; ++k) {
                std::complex<double> g{0.0, 0.0};
                for (size_t c = 0; c < chans.size(); ++c)
                    g += chans[c].gain[k] * blk_amp[c];
                g *= 1.0 + s.subcarrier_jitter * wobble[k];
                base[k] = g;
                sig_mw += std::norm(g);
            }
            sig_mw /= K;
            tr.validity[t] = sig_mw >= sens_mw;
            dirty = false;
        } else {
            tr.validity[t] = tr.validity[t - 1];
        }
        const bool valid = tr.validity[t] != 0;
        for (int k = 0; k < K; ++k) {
            std::complex<double> n{noise_rng.normal() * noise_sigma,
                                   noise_rng.normal() * noise_sigma};
            if (valid)
                tr.at(k, t) = std::complex<float>(base[k] + n);
        }
    }
    return tr;
}

}  // namespace detail

struct SoundingResult {
    CsiTrace at_a;  // measured at A (from D's probes)
    CsiTrace at_d;  // measured at D (from A's probes)
};

// One fixed-sector sounding session. Both directions share the channel
// wobble stream (reciprocity) while receiver noise is drawn independently,
// so with noise_floor -> -inf the two amplitude matrices coincide.
inline SoundingResult run_sounding(const Scene& s,
                                   const std::string& a_id, const std::string& d_id,
                                   int tx_sector_a, int rx_sector_d,
                                   double duration,
                                   const std::vector<ActivityEvent>& schedule,
                                   uint64_t seed) {
    bool viable = false;
    const Node& a = s.node(a_id);
    const Node& d = s.node(d_id);
    for (const auto& p : enumerate_paths(s, a_id, d_id))
        if (std::isfinite(path_gain_db(s, a, tx_sector_a, d, rx_sector_d, p)))
            viable = true;
    if (!viable)
        throw NoViablePath("no propagation path joins sectors " +
                           std::to_string(tx_sector_a) + "/" + std::to_string(rx_sector_d));

    std::string link = a_id < d_id ? a_id + "-" + d_id : d_id + "-" + a_id;
    uint64_t chan = derive_seed(seed, "chan/" + link);
    SoundingResult r;
    r.at_d = detail::synth_rx_trace(s, a_id, tx_sector_a, d_id, rx_sector_d,
                                    duration, schedule, chan,
                                    derive_seed(seed, "noise/" + d_id));
    r.at_a = detail::synth_rx_trace(s, d_id, rx_sector_d, a_id, tx_sector_a,
                                    duration, schedule, chan,
                                    derive_seed(seed, "noise/" + a_id));
    return r;
}

}  // namespace jb

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fingerprint.hpp"
#include "keyagree.hpp"
#include "uph.hpp"

namespace jb {

// ---------------------------------------------------------------------------
// Gap filling

enum class FillStrategy { RandomGuess, BitReuse, NoFill };

inline FillStrategy parse_fill_strategy(const std::string& s) {
    if (s == "randomGuess") return FillStrategy::RandomGuess;
    if (s == "bitReuse") return FillStrategy::BitReuse;
    if (s == "noFill") return FillStrategy::NoFill;
    throw InvalidArgs("unknown fill strategy: " + s);
}

struct FilledBits {
    BitSeq bits;
    std::vector<uint8_t> mask;  // positions the attacker commits to
};

// Complete a detection sequence that has unobserved stretches. randomGuess
// flips a fair coin per missing bit; bitReuse replays the observed run
// immediately preceding each gap (cyclically, leading gaps borrow the first
// observed run); noFill keeps only the observed positions.
inline FilledBits fill_missing(const BitSeq& bits, const std::vector<uint8_t>& observed,
                               FillStrategy strategy, uint64_t seed) {
    if (bits.size() != observed.size())
        throw LengthMismatch("detection bits and observed mask differ in length");
    FilledBits out;
    out.bits = bits;
    if (strategy == FillStrategy::NoFill) {
        out.mask = observed;
        return out;
    }
    out.mask.assign(bits.size(), 1);
    if (strategy == FillStrategy::RandomGuess) {
        // coin flips need no observations at all
        Rng rng(seed);
        for (size_t i = 0; i < bits.size(); ++i)
            if (!observed[i]) out.bits[i] = rng.coin() ? 1 : 0;
        return out;
    }
    if (std::find(observed.begin(), observed.end(), uint8_t(1)) == observed.end())
        throw NothingObserved("nothing observed, cannot fill");

    // bitReuse: contiguous observed segments, replayed into the gaps.
    struct Seg { size_t begin, end; };
    std::vector<Seg> segs;
    for (size_t i = 0; i < observed.size();) {
        if (!observed[i]) { ++i; continue; }
        size_t j = i;
        while (j < observed.size() && observed[j]) ++j;
        segs.push_back({i, j});
        i = j;
    }
    for (size_t i = 0; i < observed.size();) {
        if (observed[i]) { ++i; continue; }
        size_t j = i;
        while (j < observed.size() && !observed[j]) ++j;
        const Seg* src = &segs.front();
        for (const auto& s : segs) {
            if (s.end <= i) src = &s;
            else break;
        }
        size_t len = src->end - src->begin;
        for (size_t t = i; t < j; ++t)
            out.bits[t] = bits[src->begin + (t - i) % len];
        i = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Eavesdropper at an angle off the legitimate link

struct EavesdropResult {
    CsiTrace trace;             // what M received from A's probes
    GappedDetection detection;
    Fingerprint fingerprint;
    double observed_fraction = 0.0;
};

// M listens to A's transmissions from its own vantage point. The channel
// A->M is independent of the legitimate A<->D channel, so it gets its own
// wobble stream; M's fingerprint is built from whatever it could decode plus
// the chosen fill strategy.
inline EavesdropResult eavesdrop(const Scene& s, const std::string& a_id, int a_sector,
                                 const std::string& m_id, int m_sector, double duration,
                                 const std::vector<ActivityEvent>& schedule,
                                 const AfParams& af, FillStrategy strategy, uint64_t seed,
                                 int forced_gray_bits = 0) {
    EavesdropResult r;
    std::string link = a_id < m_id ? a_id + "-" + m_id : m_id + "-" + a_id;
    r.trace = detail::synth_rx_trace(s, a_id, a_sector, m_id, m_sector, duration, schedule,
                                     derive_seed(seed, "chan/" + link),
                                     derive_seed(seed, "noise/" + m_id));
    r.detection = detect_with_gaps(r.trace, af);
    if (!r.detection.observed.empty())
        r.observed_fraction =
            double(std::count(r.detection.observed.begin(), r.detection.observed.end(), 1)) /
            double(r.detection.observed.size());

    if (strategy == FillStrategy::NoFill) {
        BitSeq kept;
        for (size_t i = 0; i < r.detection.bits.size(); ++i)
            if (r.detection.observed[i]) kept.push_back(r.detection.bits[i]);
        if (!kept.empty())
            r.fingerprint = encode_detection(kept, af.lsb_count, forced_gray_bits);
    } else {
        try {
            FilledBits fb = fill_missing(r.detection.bits, r.detection.observed, strategy, seed);
            r.fingerprint = encode_detection(fb.bits, af.lsb_count, forced_gray_bits);
        } catch (const NothingObserved&) {
            // bitReuse with nothing heard: no fingerprint, maximal mismatch
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Keylogger (side-channel camera watching the activity source)

struct KeyloggerParams {
    double frame_rate = 30.0;   // camera frames per second
    int jitter_frames = 1;      // +- start frames of timing error
    double bias_min = 10.0;     // perceived/actual duration ratio range
    double bias_max = 30.0;
    double widen_sec = -1.0;    // <0: half the variance window (public parameter)
};

// M never sees CSI; it reconstructs the detection sequence from event times
// read off a camera feed, then runs the public encoding tail. Durations come
// out inflated (the visible motion outlasts the channel disturbance) and
// starts land on frame boundaries with a little jitter.
inline Fingerprint keylog_fingerprint(const std::vector<ActivityEvent>& schedule,
                                      double duration, double sample_rate,
                                      const AfParams& af, const KeyloggerParams& kp,
                                      uint64_t seed, int forced_gray_bits = 0) {
    if (kp.frame_rate <= 0.0) throw InvalidParams("frame rate must be > 0");
    if (kp.bias_min <= 0.0 || kp.bias_max < kp.bias_min)
        throw InvalidParams("invalid duration bias range");
    const int w_s = af.downsample_factor;
    const size_t bins = size_t(duration * sample_rate) / w_s;
    if (bins == 0) throw SeriesTooShort("observation too short for one sample");
    const double bin_sec = w_s / sample_rate;
    double widen = kp.widen_sec >= 0.0 ? kp.widen_sec : af.moving_variance_window_sec / 2.0;

    Rng rng(seed);
    BitSeq b(bins, 0);
    for (const auto& ev : schedule) {
        if (ev.start >= duration) continue;
        double start = std::round(ev.start * kp.frame_rate) / kp.frame_rate;
        if (kp.jitter_frames > 0) {
            long j = long(rng.uniform_int(uint64_t(2 * kp.jitter_frames + 1))) - kp.jitter_frames;
            start += double(j) / kp.frame_rate;
        }
        double dur = ev.duration * rng.uniform(kp.bias_min, kp.bias_max);
        double lo = start - widen, hi = start + dur + widen;
        for (size_t i = 0; i < bins; ++i) {
            double c = (double(i) + 0.5) * bin_sec;
            if (c >= lo && c <= hi) b[i] = 1;
        }
    }
    return encode_detection(b, af.lsb_count, forced_gray_bits);
}

// ---------------------------------------------------------------------------
// Path-hopping odds

// Chance that a guesser who picks uniformly among P viable paths hits the
// legitimate choice on all Q matched hops.
inline double prop1_probability(int paths, int matched_hops) {
    if (paths < 1) throw InvalidArgs("need at least one path");
    if (matched_hops < 0) throw InvalidArgs("matched hop count cannot be negative");
    return std::pow(1.0 / double(paths), double(matched_hops));
}

// Pr[exactly j of Q hops guessed right], Binomial(Q, 1/P).
inline double partial_match_pmf(int paths, int matched_hops, int j) {
    if (paths < 1) throw InvalidArgs("need at least one path");
    if (matched_hops < 0 || j < 0 || j > matched_hops)
        throw InvalidArgs("invalid match count");
    if (paths == 1) return j == matched_hops ? 1.0 : 0.0;
    double p = 1.0 / double(paths);
    double log_c = std::lgamma(matched_hops + 1.0) - std::lgamma(j + 1.0) -
                   std::lgamma(matched_hops - j + 1.0);
    return std::exp(log_c + j * std::log(p) + (matched_hops - j) * std::log1p(-p));
}

struct MatchEstimate {
    double full_match_rate = 0.0;
    std::vector<double> match_count_pmf;  // empirical, index = #hops guessed right
};

inline MatchEstimate monte_carlo_match(int paths, int matched_hops, size_t trials,
                                       uint64_t seed) {
    if (paths < 1) throw InvalidArgs("need at least one path");
    if (matched_hops < 0) throw InvalidArgs("matched hop count cannot be negative");
    if (trials == 0) throw InvalidArgs("need at least one trial");
    MatchEstimate e;
    e.match_count_pmf.assign(size_t(matched_hops) + 1, 0.0);
    Rng rng(seed);
    for (size_t t = 0; t < trials; ++t) {
        int hits = 0;
        for (int q = 0; q < matched_hops; ++q)
            if (rng.uniform_int(uint64_t(paths)) == rng.uniform_int(uint64_t(paths))) ++hits;
        e.match_count_pmf[size_t(hits)] += 1.0;
        if (hits == matched_hops) e.full_match_rate += 1.0;
    }
    for (auto& v : e.match_count_pmf) v /= double(trials);
    e.full_match_rate /= double(trials);
    return e;
}

// ---------------------------------------------------------------------------
// Co-located hopping adversary

struct ColocatedResult {
    Fingerprint fingerprint_m;
    Fingerprint fingerprint_d;
    double bmr_vs_d = 1.0;
    size_t slots_heard = 0;
    bool key_recovered = false;
};

// M sits next to D, knows D's viable sector set and the slot clock, but not
// the hop choices. It hops on its own and hears A's probe exactly when its
// guess pairs with A's slot sector on a real path; by co-location that view
// is D's view of the same pair. Unheard slots are filled per strategy.
// `seed` must be the seed that was given to run_uph_sounding so that pairs D
// never used still come out of the same deterministic streams.
inline ColocatedResult colocated_uph_attack(const Scene& s, const std::string& a_id,
                                            const std::string& d_id, const HopSequence& seq_a,
                                            const HopSequence& seq_m, const UphRun& run,
                                            const std::vector<ActivityEvent>& schedule,
                                            double duration, const AfParams& af,
                                            FillStrategy strategy, uint64_t seed,
                                            const Commitment* commitment = nullptr,
                                            const RsCode* code = nullptr,
                                            const SecretKey* key = nullptr) {
    const Node& a = s.node(a_id);
    const Node& d = s.node(d_id);
    auto paths = enumerate_paths(s, a_id, d_id);
    const size_t slots = std::min(seq_a.entries.size(), seq_m.entries.size());
    const size_t min_samples = 2 * size_t(s.samples_per_probe);
    std::string link = a_id < d_id ? a_id + "-" + d_id : d_id + "-" + a_id;

    // Local cache so pairs D never matched can still be synthesized with the
    // exact seeds the legitimate run would have used.
    std::map<std::pair<int, int>, SoundingResult> extra;
    auto sounding_for = [&](std::pair<int, int> key_sp) -> const SoundingResult& {
        auto it = run.pair_soundings.find(key_sp);
        if (it != run.pair_soundings.end()) return it->second;
        auto it2 = extra.find(key_sp);
        if (it2 != extra.end()) return it2->second;
        uint64_t pseed = derive_seed(seed, "uph/" + link + "/" + std::to_string(key_sp.first) +
                                               "-" + std::to_string(key_sp.second));
        return extra.emplace(key_sp, run_sounding(s, a_id, d_id, key_sp.first, key_sp.second,
                                                  duration, schedule, pseed))
            .first->second;
    };

    ColocatedResult r;
    CsiTrace tr = run.at_d;  // shape template
    std::fill(tr.samples.begin(), tr.samples.end(), std::complex<float>{});
    std::fill(tr.validity.begin(), tr.validity.end(), 0);
    tr.owner = "M";

    for (size_t i = 0; i < slots; ++i) {
        int sa = seq_a.entries[i], sm = seq_m.entries[i];
        bool joined = false;
        for (const auto& p : paths)
            if (std::isfinite(path_gain_db(s, a, sa, d, sm, p))) joined = true;
        if (!joined || run.slot_samples < min_samples) continue;
        ++r.slots_heard;
        const auto& src = sounding_for({sa, sm}).at_d;
        size_t lo = i * run.slot_samples;
        size_t hi = std::min(lo + run.slot_samples, size_t(tr.width()));
        for (size_t t = lo; t < hi; ++t) {
            tr.validity[t] = src.validity[t];
            for (int k = 0; k < tr.subcarriers; ++k)
                tr.at(k, int(t)) = src.at(k, int(t));
        }
    }

    r.fingerprint_d = fingerprint(run.at_d, af);
    auto det = detect_with_gaps(tr, af);
    try {
        if (strategy == FillStrategy::NoFill) {
            BitSeq kept;
            for (size_t i = 0; i < det.bits.size(); ++i)
                if (det.observed[i]) kept.push_back(det.bits[i]);
            r.fingerprint_m = encode_detection(kept, af.lsb_count, r.fingerprint_d.gray_bits);
        } else {
            FilledBits fb = fill_missing(det.bits, det.observed, strategy,
                                         derive_seed(seed, "fill/" + std::string("M")));
            r.fingerprint_m = encode_detection(fb.bits, af.lsb_count, r.fingerprint_d.gray_bits);
        }
    } catch (const NothingObserved&) {
        // heard nothing at all: an empty fingerprint, maximal BMR
    }
    if (!r.fingerprint_m.bits.empty() && !r.fingerprint_d.bits.empty())
        r.bmr_vs_d = bmr_common_prefix(r.fingerprint_m.bits, r.fingerprint_d.bits);
    if (commitment && code && key) {
        auto got = open_commitment(r.fingerprint_m, *commitment, *code);
        r.key_recovered = got.has_value() && *got == *key;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Beam stealing

struct BeamStealResult {
    bool succeeded = false;
    bool session_am_accepted = false;
    bool session_md_accepted = false;
    double bmr_am = 1.0;
    double bmr_md = 1.0;
    size_t uncontrolled_paths = 0;  // Jellybean+ only
    double bmr_m_vs_a = 1.0;        // Jellybean+ only
};

namespace adv_detail {

// Strongest sector pair between two nodes by static RSS.
inline std::pair<int, int> best_sector_pair(const Scene& s, const std::string& tx,
                                            const std::string& rx) {
    std::pair<int, int> best{-1, -1};
    double best_rss = kNegInfDbm;
    for (int st = 0; st < s.sector_count; ++st)
        for (int sr = 0; sr < s.sector_count; ++sr) {
            double v = rss(s, tx, st, rx, sr, 0.0);
            if (v > best_rss) {
                best_rss = v;
                best = {st, sr};
            }
        }
    if (best_rss < s.sensitivity_dbm) throw NoViablePath("no decodable sector pair");
    return best;
}

}  // namespace adv_detail

// Against basic Jellybean the attack is a plain man-in-the-middle: M steers
// A's and D's beams onto itself and completes an honest-looking session with
// each side. Both sessions see the same ambient activity, so both accept.
inline BeamStealResult beam_steal_basic(const Scene& s, const std::string& a_id,
                                        const std::string& d_id, const std::string& m_id,
                                        double duration,
                                        const std::vector<ActivityEvent>& schedule,
                                        const AfParams& af, const RsCode& code,
                                        uint64_t seed) {
    BeamStealResult r;
    auto [sa, sm_a] = adv_detail::best_sector_pair(s, a_id, m_id);
    auto [sm_d, sd] = adv_detail::best_sector_pair(s, m_id, d_id);

    auto snd_am = run_sounding(s, a_id, m_id, sa, sm_a, duration, schedule,
                               derive_seed(seed, "steal/am"));
    auto snd_md = run_sounding(s, m_id, d_id, sm_d, sd, duration, schedule,
                               derive_seed(seed, "steal/md"));

    auto out_am = pair_devices(snd_am.at_a, snd_am.at_d, af, code, derive_seed(seed, "pair/am"));
    auto out_md = pair_devices(snd_md.at_a, snd_md.at_d, af, code, derive_seed(seed, "pair/md"));
    r.session_am_accepted = out_am.accepted;
    r.session_md_accepted = out_md.accepted;
    r.bmr_am = out_am.bmr;
    r.bmr_md = out_md.bmr;
    r.succeeded = out_am.accepted && out_md.accepted;
    return r;
}

// Against Jellybean+, M injects one forged sector into each viable set (it
// answers discovery probes loudly), but it cannot see the slots A and D
// spend on paths it does not control. With >= 2 uncontrolled paths the
// fingerprint M pieces together fails the commitment check.
inline BeamStealResult beam_steal_plus(const Scene& s, const std::string& a_id,
                                       const std::string& d_id, const std::string& m_id,
                                       double epsilon_db, double dwell_sec, double duration,
                                       const std::vector<ActivityEvent>& schedule,
                                       const AfParams& af, const RsCode& code,
                                       FillStrategy strategy, uint64_t seed) {
    BeamStealResult r;
    auto [va, vd] = path_discovery(s, a_id, d_id, epsilon_db, derive_seed(seed, "disc"));
    r.uncontrolled_paths = va.sectors.size();

    // The forged announcements: A's sector facing M, D's sector facing M.
    auto [fa, fm_a] = adv_detail::best_sector_pair(s, a_id, m_id);
    auto [fd, fm_d] = adv_detail::best_sector_pair(s, d_id, m_id);
    ViableSectorSet va2 = va, vd2 = vd;
    if (std::find(va2.sectors.begin(), va2.sectors.end(), fa) == va2.sectors.end())
        va2.sectors.push_back(fa);
    if (std::find(vd2.sectors.begin(), vd2.sectors.end(), fd) == vd2.sectors.end())
        vd2.sectors.push_back(fd);
    std::sort(va2.sectors.begin(), va2.sectors.end());
    std::sort(vd2.sectors.begin(), vd2.sectors.end());

    auto seq_a = generate_hop_sequence(va2, dwell_sec, duration, derive_seed(seed, "hop/a"));
    auto seq_d = generate_hop_sequence(vd2, dwell_sec, duration, derive_seed(seed, "hop/d"));
    auto run = run_uph_sounding(s, a_id, d_id, seq_a, seq_d, schedule, duration,
                                derive_seed(seed, "uph"));
    if (run.matched_hops == 0) return r;  // session never got off the ground

    // The legitimate session completes over the matched slots; redo it here
    // explicitly so A's committed fingerprint is in hand for the replay.
    Fingerprint f_a = fingerprint(run.at_a, af);
    Fingerprint f_d = fingerprint(run.at_d, af);
    if (f_a.gray_bits != f_d.gray_bits) {
        int shared = std::max(f_a.gray_bits, f_d.gray_bits);
        f_a = fingerprint(run.at_a, af, shared);
        f_d = fingerprint(run.at_d, af, shared);
    }

    // M's view: only the slots where A pointed at the forged sector, heard
    // on M's own independent channel.
    const size_t slots = std::min(seq_a.entries.size(), seq_d.entries.size());
    std::string link = a_id < m_id ? a_id + "-" + m_id : m_id + "-" + a_id;
    CsiTrace full = detail::synth_rx_trace(s, a_id, fa, m_id, fm_a, duration, schedule,
                                           derive_seed(seed, "chan/" + link),
                                           derive_seed(seed, "noise/" + m_id));
    CsiTrace tr = full;
    std::fill(tr.samples.begin(), tr.samples.end(), std::complex<float>{});
    std::fill(tr.validity.begin(), tr.validity.end(), 0);
    tr.owner = m_id;
    for (size_t i = 0; i < slots; ++i) {
        if (seq_a.entries[i] != fa) continue;
        size_t lo = i * run.slot_samples;
        size_t hi = std::min(lo + run.slot_samples, size_t(tr.width()));
        for (size_t t = lo; t < hi; ++t) {
            tr.validity[t] = full.validity[t];
            for (int k = 0; k < tr.subcarriers; ++k)
                tr.at(k, int(t)) = full.at(k, int(t));
        }
    }

    Fingerprint fm;
    auto det = detect_with_gaps(tr, af);
    try {
        if (strategy == FillStrategy::NoFill) {
            BitSeq kept;
            for (size_t i = 0; i < det.bits.size(); ++i)
                if (det.observed[i]) kept.push_back(det.bits[i]);
            fm = encode_detection(kept, af.lsb_count, f_a.gray_bits);
        } else {
            FilledBits fb =
                fill_missing(det.bits, det.observed, strategy, derive_seed(seed, "fill/m"));
            fm = encode_detection(fb.bits, af.lsb_count, f_a.gray_bits);
        }
    } catch (const NothingObserved&) {
    }
    if (!fm.bits.empty() && !f_a.bits.empty())
        r.bmr_m_vs_a = bmr_common_prefix(fm.bits, f_a.bits);

    // Replay A's commitment against M's fingerprint.
    auto [c, k] = commit(f_a, code, derive_seed(seed, "key"));
    auto at_d = open_commitment(f_d, c, code);
    r.session_am_accepted = at_d.has_value() && *at_d == k;  // the legitimate session
    auto got = open_commitment(fm, c, code);
    r.succeeded = got.has_value() && *got == k;
    return r;
}

}  // namespace jb

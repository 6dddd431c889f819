#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "jellybean/common.hpp"
#include "jellybean/trace.hpp"
#include "jellybean/wavelet.hpp"

namespace jb {

struct AfParams {
    double moving_variance_window_sec = 0.1;  // W_m
    int downsample_factor = 300;              // W_s, samples
    int lsb_count = 5;                        // N_lsb
    double threshold_window_sec = 1.0;        // l
    int wavelet_levels = 4;
    double threshold_guard = 3.0;             // multiplicative guard on tau
};

struct SmoothedSeries {
    std::vector<double> values;  // Gamma
    double sample_rate = 0.0;    // Hz, post-downsample
};

struct RunBlock {
    int length = 0;
    uint8_t bit = 0;
};

struct BlockSpan {
    int source_run = 0;
    int contributed_bits = 0;
};

struct Fingerprint {
    BitSeq bits;
    std::vector<BlockSpan> block_spans;
    int event_count = 0;  // number of activity (bit=1) runs
    int gray_bits = 0;    // width used during encoding (shared metadata)
};

// ---------------------------------------------------------------------------
// Step 2: denoising, subcarrier ranking, smoothing

// Wavelet-denoises the per-subcarrier amplitude series (valid columns only),
// preserving phase and the validity mask.
inline CsiTrace denoise(const CsiTrace& trace, int levels = 4) {
    CsiTrace out = trace;
    std::vector<int> idx;
    for (int t = 0; t < trace.width(); ++t)
        if (trace.validity[t]) idx.push_back(t);
    if (idx.empty()) return out;

    std::vector<double> amp(idx.size());
    for (int k = 0; k < trace.subcarriers; ++k) {
        for (size_t i = 0; i < idx.size(); ++i) amp[i] = trace.amplitude(k, idx[i]);
        auto den = wavelet_denoise(amp, levels);
        for (size_t i = 0; i < idx.size(); ++i) {
            auto c = trace.at(k, idx[i]);
            double phase = std::arg(std::complex<double>(c));
            out.at(k, idx[i]) = std::complex<float>(std::polar(std::max(den[i], 0.0), phase));
        }
    }
    return out;
}

namespace af_detail {

inline std::vector<std::vector<double>> valid_amplitudes(const CsiTrace& trace) {
    std::vector<int> idx;
    for (int t = 0; t < trace.width(); ++t)
        if (trace.validity[t]) idx.push_back(t);
    std::vector<std::vector<double>> amp(trace.subcarriers, std::vector<double>(idx.size()));
    for (int k = 0; k < trace.subcarriers; ++k)
        for (size_t i = 0; i < idx.size(); ++i)
            amp[k][i] = trace.amplitude(k, idx[i]);
    return amp;
}

// Pearson cross-correlation with the (alphaN - 1) normalization; series with
// zero variance are assigned rho = 0 instead of failing.
inline double cross_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    if (n < 2) return 0.0;
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double va = 0.0, vb = 0.0, cov = 0.0;
    for (size_t i = 0; i < n; ++i) {
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
        cov += (a[i] - ma) * (b[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    double sa = std::sqrt(va / (n - 1));
    double sb = std::sqrt(vb / (n - 1));
    return cov / ((n - 1) * sa * sb);
}

}  // namespace af_detail

// Top K/2 subcarriers by cross-correlation with the center subcarrier;
// ties break toward lower index so both devices rank identically.
inline std::vector<int> rank_subcarriers(const CsiTrace& trace) {
    const int K = trace.subcarriers;
    if (K % 2 != 0) throw InvalidParams("subcarrier count must be even for ranking");
    auto amp = af_detail::valid_amplitudes(trace);
    const int ref = K / 2 - 1;  // center subcarrier (K/2-th, 1-based)

    std::vector<std::pair<double, int>> scored(K);
    for (int k = 0; k < K; ++k)
        scored[k] = {af_detail::cross_correlation(amp[k], amp[ref]), k};
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
    });
    std::vector<int> out(K / 2);
    for (int i = 0; i < K / 2; ++i) out[i] = scored[i].second;
    return out;
}

// Centered W-point moving variance (unbiased); boundary samples use the
// truncated window that fits.
inline std::vector<double> moving_variance(const std::vector<double>& series, int window) {
    if (window < 2) throw InvalidParams("moving variance window must be >= 2");
    if (window % 2 == 0) throw InvalidParams("moving variance window must be odd");
    const int n = int(series.size());
    if (window > n) throw WindowTooLarge("moving variance window exceeds series length");

    std::vector<double> pre(n + 1, 0.0), pre2(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        pre[i + 1] = pre[i] + series[i];
        pre2[i + 1] = pre2[i] + series[i] * series[i];
    }
    const int half = (window - 1) / 2;
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
        int lo = std::max(0, j - half);
        int hi = std::min(n - 1, j + half);
        int m = hi - lo + 1;
        if (m < 2) { out[j] = 0.0; continue; }
        double s = pre[hi + 1] - pre[lo];
        double s2 = pre2[hi + 1] - pre2[lo];
        double var = (s2 - s * s / m) / (m - 1);
        out[j] = std::max(var, 0.0);
    }
    return out;
}

// Column-mean across the retained subcarriers, then non-overlapping
// W_s-sample averaging; the trailing remainder is dropped.
inline SmoothedSeries aggregate_and_downsample(const std::vector<std::vector<double>>& per_subcarrier_mv,
                                               int w_s, double source_rate) {
    if (w_s < 1) throw InvalidParams("downsample factor must be >= 1");
    if (per_subcarrier_mv.empty()) throw EmptyInput("no subcarrier series to aggregate");
    const size_t n = per_subcarrier_mv.front().size();
    std::vector<double> mean(n, 0.0);
    for (const auto& row : per_subcarrier_mv) {
        if (row.size() != n) throw LengthMismatch("subcarrier series lengths differ");
        for (size_t i = 0; i < n; ++i) mean[i] += row[i];
    }
    for (auto& v : mean) v /= double(per_subcarrier_mv.size());

    SmoothedSeries out;
    out.sample_rate = source_rate / w_s;
    const size_t chunks = n / w_s;
    out.values.resize(chunks);
    for (size_t c = 0; c < chunks; ++c) {
        double acc = 0.0;
        for (int i = 0; i < w_s; ++i) acc += mean[c * w_s + i];
        out.values[c] = acc / w_s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Step 3: threshold detection

inline double compute_threshold(const SmoothedSeries& gamma, double window_sec,
                                double guard = 3.0) {
    if (window_sec <= 0.0) throw InvalidParams("threshold window must be > 0");
    size_t l = size_t(std::lround(window_sec * gamma.sample_rate));
    if (l < 1) l = 1;
    if (l > gamma.values.size())
        throw SeriesTooShort("series shorter than the threshold window");
    std::vector<double> sorted = gamma.values;
    std::partial_sort(sorted.begin(), sorted.begin() + l, sorted.end());
    double mean = std::accumulate(sorted.begin(), sorted.begin() + l, 0.0) / double(l);
    return guard * mean;
}

inline BitSeq detect_activity(const SmoothedSeries& gamma, double tau) {
    BitSeq b(gamma.values.size());
    for (size_t i = 0; i < b.size(); ++i) b[i] = gamma.values[i] >= tau ? 1 : 0;
    return b;
}

// ---------------------------------------------------------------------------
// Step 4: RLE + Gray + LSB encoding

inline std::vector<RunBlock> rle_encode(const BitSeq& bits) {
    if (bits.empty()) throw EmptyInput("cannot run-length encode an empty sequence");
    std::vector<RunBlock> runs;
    RunBlock cur{1, bits[0]};
    for (size_t i = 1; i < bits.size(); ++i) {
        if (bits[i] == cur.bit) {
            ++cur.length;
        } else {
            runs.push_back(cur);
            cur = {1, bits[i]};
        }
    }
    runs.push_back(cur);
    return runs;
}

inline BitSeq rle_decode(const std::vector<RunBlock>& runs) {
    BitSeq out;
    for (const auto& r : runs) out.insert(out.end(), size_t(r.length), r.bit);
    return out;
}

inline uint32_t gray_code(uint32_t x) { return x ^ (x >> 1); }

inline int bit_length(uint32_t x) {
    int n = 0;
    while (x) { ++n; x >>= 1; }
    return n;
}

struct GrayBlocks {
    int gray_bits = 0;       // counter width; total block width is gray_bits + 1
    BitSeq bits;             // concatenated blocks, MSB-first counters

    int block_width() const { return gray_bits + 1; }
    size_t block_count() const { return block_width() ? bits.size() / block_width() : 0; }
};

// Each block: Gray code of the run length (gray_bits wide, MSB first)
// followed by the run's bit value.
inline GrayBlocks gray_encode(const std::vector<RunBlock>& runs, int gray_bits) {
    if (gray_bits < 1) throw InvalidParams("gray bit width must be >= 1");
    GrayBlocks out;
    out.gray_bits = gray_bits;
    out.bits.reserve(runs.size() * (gray_bits + 1));
    for (const auto& r : runs) {
        if (r.length >= (1 << gray_bits))
            throw RunOverflow("run length " + std::to_string(r.length) +
                              " not representable in " + std::to_string(gray_bits) + " gray bits");
        uint32_t g = gray_code(uint32_t(r.length));
        for (int b = gray_bits - 1; b >= 0; --b) out.bits.push_back((g >> b) & 1u);
        out.bits.push_back(r.bit);
    }
    return out;
}

// Keep the n_lsb least significant bits of each block, in block order.
inline Fingerprint truncate_lsb(const GrayBlocks& s, int n_lsb) {
    const int width = s.block_width();
    if (n_lsb < 1 || n_lsb > width)
        throw TruncationTooWide("cannot keep " + std::to_string(n_lsb) +
                                " bits of a " + std::to_string(width) + "-bit block");
    Fingerprint f;
    f.gray_bits = s.gray_bits;
    f.bits.reserve(s.block_count() * n_lsb);
    for (size_t blk = 0; blk < s.block_count(); ++blk) {
        size_t base = blk * width + (width - n_lsb);
        for (int i = 0; i < n_lsb; ++i) f.bits.push_back(s.bits[base + i]);
        f.block_spans.push_back({int(blk), n_lsb});
    }
    return f;
}

// Width needed to Gray-encode every run: bit length of the longest run,
// which guarantees length < 2^gray_bits.
inline int gray_bits_for(const std::vector<RunBlock>& runs) {
    int longest = 0;
    for (const auto& r : runs) longest = std::max(longest, r.length);
    return std::max(bit_length(uint32_t(longest)) , 1);
}

// Optional visibility into the pipeline stages (--dump-stages).
struct AfStages {
    std::vector<int> ranked;
    SmoothedSeries aggregated;   // averaged moving variance, full sample rate
    SmoothedSeries gamma;
    double tau = 0.0;
    BitSeq detection;
    std::vector<RunBlock> runs;
};

// Full pipeline. Only valid columns contribute; both devices of a sounding
// session share the validity mask, so their compressed timelines line up.
// forced_gray_bits, when larger than the derived width, mimics the two
// devices agreeing on the wider counter in the clear.
inline Fingerprint fingerprint(const CsiTrace& trace, const AfParams& p,
                               int forced_gray_bits = 0, AfStages* stages = nullptr) {
    if (trace.valid_count() == 0) throw EmptyInput("trace has no valid samples");
    CsiTrace den = denoise(trace, p.wavelet_levels);
    auto ranked = rank_subcarriers(den);
    auto amp = af_detail::valid_amplitudes(den);

    int w_m = int(std::lround(p.moving_variance_window_sec * trace.sample_rate));
    if (w_m % 2 == 0) ++w_m;
    if (w_m < 3) w_m = 3;

    std::vector<std::vector<double>> mv;
    mv.reserve(ranked.size());
    for (int k : ranked) mv.push_back(moving_variance(amp[k], w_m));

    SmoothedSeries gamma = aggregate_and_downsample(mv, p.downsample_factor, trace.sample_rate);
    double tau = compute_threshold(gamma, p.threshold_window_sec, p.threshold_guard);
    BitSeq b = detect_activity(gamma, tau);
    auto runs = rle_encode(b);

    int gray_bits = std::max(gray_bits_for(runs), forced_gray_bits);
    auto blocks = gray_encode(runs, gray_bits);
    int n_lsb = std::min(p.lsb_count, blocks.block_width());
    Fingerprint f = truncate_lsb(blocks, n_lsb);
    for (const auto& r : runs)
        if (r.bit) ++f.event_count;

    if (stages) {
        stages->ranked = ranked;
        stages->gamma = gamma;
        stages->tau = tau;
        stages->detection = b;
        stages->runs = runs;
    }
    return f;
}

// Detection on the full (uncompressed) timeline, for observers whose trace
// has gaps: moving variance runs over the valid samples, values are placed
// back at their original positions, and a Gamma bin counts as observed only
// when at least half of its samples were decodable. The threshold is drawn
// from observed bins alone.
struct GappedDetection {
    BitSeq bits;                   // defined only where observed
    std::vector<uint8_t> observed; // per Gamma bin
    SmoothedSeries gamma;
    double tau = 0.0;
};

inline GappedDetection detect_with_gaps(const CsiTrace& trace, const AfParams& p) {
    GappedDetection out;
    const int w_s = p.downsample_factor;
    const size_t bins = size_t(trace.width()) / w_s;
    out.gamma.sample_rate = trace.sample_rate / w_s;
    out.gamma.values.assign(bins, 0.0);
    out.observed.assign(bins, 0);
    out.bits.assign(bins, 0);
    if (trace.valid_count() == 0) return out;

    CsiTrace den = denoise(trace, p.wavelet_levels);
    auto ranked = rank_subcarriers(den);
    auto amp = af_detail::valid_amplitudes(den);
    int w_m = int(std::lround(p.moving_variance_window_sec * trace.sample_rate));
    if (w_m % 2 == 0) ++w_m;
    if (w_m < 3) w_m = 3;
    if (w_m > int(amp[0].size())) w_m = int(amp[0].size()) | 1;

    std::vector<double> mean(amp[0].size(), 0.0);
    for (int k : ranked) {
        auto mv = moving_variance(amp[k], w_m);
        for (size_t i = 0; i < mv.size(); ++i) mean[i] += mv[i];
    }
    for (auto& v : mean) v /= double(ranked.size());

    std::vector<int> valid_pos;
    for (int t = 0; t < trace.width(); ++t)
        if (trace.validity[t]) valid_pos.push_back(t);

    std::vector<double> acc(bins, 0.0);
    std::vector<int> cnt(bins, 0);
    for (size_t i = 0; i < valid_pos.size(); ++i) {
        size_t bin = size_t(valid_pos[i]) / w_s;
        if (bin >= bins) break;
        acc[bin] += mean[i];
        ++cnt[bin];
    }
    std::vector<double> observed_vals;
    for (size_t b = 0; b < bins; ++b) {
        if (cnt[b] * 2 >= w_s) {
            out.observed[b] = 1;
            out.gamma.values[b] = acc[b] / cnt[b];
            observed_vals.push_back(out.gamma.values[b]);
        }
    }
    if (observed_vals.empty()) return out;

    size_t l = size_t(std::lround(p.threshold_window_sec * out.gamma.sample_rate));
    l = std::clamp<size_t>(l, 1, observed_vals.size());
    std::partial_sort(observed_vals.begin(), observed_vals.begin() + l, observed_vals.end());
    double m = std::accumulate(observed_vals.begin(), observed_vals.begin() + l, 0.0) / double(l);
    out.tau = p.threshold_guard * m;
    for (size_t b = 0; b < bins; ++b)
        if (out.observed[b]) out.bits[b] = out.gamma.values[b] >= out.tau ? 1 : 0;
    return out;
}

// Encoding tail shared with observers that form their detection sequence by
// other means (camera timelines, filled gap sequences).
inline Fingerprint encode_detection(const BitSeq& b, int n_lsb, int forced_gray_bits = 0) {
    auto runs = rle_encode(b);
    int gray_bits = std::max(gray_bits_for(runs), forced_gray_bits);
    auto blocks = gray_encode(runs, gray_bits);
    Fingerprint f = truncate_lsb(blocks, std::min(n_lsb, blocks.block_width()));
    for (const auto& r : runs)
        if (r.bit) ++f.event_count;
    return f;
}

}  // namespace jb

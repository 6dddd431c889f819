#pragma once

#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "jellybean/common.hpp"
#include "jellybean/fingerprint.hpp"
#include "jellybean/simenv.hpp"

namespace jb {

// Bit mismatch rate: Hamming distance over compared length. An optional
// mask restricts the comparison (used by the no-fill strategy).
inline double bmr(const BitSeq& f1, const BitSeq& f2, const std::vector<uint8_t>* mask = nullptr) {
    if (f1.size() != f2.size())
        throw LengthMismatch("BMR requires equal-length sequences");
    if (mask && mask->size() != f1.size())
        throw LengthMismatch("BMR mask length mismatch");
    size_t compared = 0, mismatched = 0;
    for (size_t i = 0; i < f1.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        ++compared;
        mismatched += f1[i] != f2[i];
    }
    if (compared == 0) throw EmptyComparison("no positions to compare");
    return double(mismatched) / double(compared);
}

// Adversary fingerprints rarely match the legitimate length; the evaluation
// convention is to compare over the common prefix.
inline double bmr_common_prefix(const BitSeq& a, const BitSeq& b) {
    size_t n = std::min(a.size(), b.size());
    if (n == 0) throw EmptyComparison("empty fingerprint");
    size_t mism = 0;
    for (size_t i = 0; i < n; ++i) mism += a[i] != b[i];
    return double(mism) / double(n);
}

// Secret bit rate: fingerprint bits per activity event inside the window.
inline double sbr(const Fingerprint& f, const std::vector<ActivityEvent>& schedule,
                  double window_sec) {
    size_t events = 0;
    for (const auto& ev : schedule)
        if (ev.start < window_sec && ev.start + ev.duration > 0.0) ++events;
    if (events == 0) throw NoActivity("no activity events overlap the sounding window");
    return double(f.bits.size()) / double(events);
}

struct ApEnResult {
    double apen = 0.0;
    double p_value = 0.0;
};

namespace apen_detail {

// phi(m): frequencies of overlapping m-bit patterns with wrap-around.
inline double phi(const BitSeq& bits, int m) {
    const size_t n = bits.size();
    if (m == 0) return 0.0;
    std::vector<size_t> counts(size_t(1) << m, 0);
    const uint32_t mask = (1u << m) - 1;
    uint32_t window = 0;
    for (int i = 0; i < m - 1; ++i) window = (window << 1) | bits[i % n];
    for (size_t i = 0; i < n; ++i) {
        window = ((window << 1) | bits[(i + m - 1) % n]) & mask;
        ++counts[window];
    }
    double sum = 0.0;
    for (size_t c : counts) {
        if (c == 0) continue;
        double p = double(c) / double(n);
        sum += p * std::log(p);
    }
    return sum;
}

}  // namespace apen_detail

// NIST SP 800-22 Approximate Entropy test.
inline ApEnResult apen(const BitSeq& bits, int m) {
    if (m < 1) throw InvalidParams("ApEn block length must be >= 1");
    const size_t n = bits.size();
    if (n < (size_t(1) << (m + 1)))
        throw SequenceTooShort("ApEn needs at least 2^(m+1) bits");
    double ap = apen_detail::phi(bits, m) - apen_detail::phi(bits, m + 1);
    double chi2 = 2.0 * double(n) * (std::log(2.0) - ap);
    double p = boost::math::gamma_q(double(size_t(1) << (m - 1)), chi2 / 2.0);
    return {ap, p};
}

}  // namespace jb

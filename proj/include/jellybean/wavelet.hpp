#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "jellybean/common.hpp"

namespace jb {

// Multi-level Haar decomposition with soft thresholding of the detail
// coefficients at the universal threshold. Odd-length levels carry their
// trailing sample through untouched.
namespace wavelet_detail {

inline void haar_forward(std::vector<double>& x, std::vector<double>& detail) {
    const size_t n = x.size();
    const size_t half = n / 2;
    std::vector<double> approx(half + (n % 2));
    detail.resize(half);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (size_t i = 0; i < half; ++i) {
        approx[i] = (x[2 * i] + x[2 * i + 1]) * inv_sqrt2;
        detail[i] = (x[2 * i] - x[2 * i + 1]) * inv_sqrt2;
    }
    if (n % 2) approx[half] = x[n - 1] * std::sqrt(2.0) * inv_sqrt2;  // pass-through
    x = std::move(approx);
}

inline void haar_inverse(std::vector<double>& approx, const std::vector<double>& detail,
                         size_t out_len) {
    std::vector<double> x(out_len);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (size_t i = 0; i < detail.size(); ++i) {
        x[2 * i] = (approx[i] + detail[i]) * inv_sqrt2;
        x[2 * i + 1] = (approx[i] - detail[i]) * inv_sqrt2;
    }
    if (out_len % 2) x[out_len - 1] = approx[detail.size()];
    approx = std::move(x);
}

inline double soft(double v, double thr) {
    if (v > thr) return v - thr;
    if (v < -thr) return v + thr;
    return 0.0;
}

}  // namespace wavelet_detail

inline std::vector<double> wavelet_denoise(const std::vector<double>& series, int levels = 4) {
    const size_t n = series.size();
    if (n < 4 || levels < 1) return series;

    std::vector<double> approx = series;
    std::vector<std::vector<double>> details;
    std::vector<size_t> lengths;
    for (int lv = 0; lv < levels && approx.size() >= 2; ++lv) {
        lengths.push_back(approx.size());
        std::vector<double> d;
        wavelet_detail::haar_forward(approx, d);
        details.push_back(std::move(d));
    }
    if (details.empty()) return series;

    // Noise scale from the finest detail level (MAD estimator).
    std::vector<double> mags;
    mags.reserve(details[0].size());
    for (double v : details[0]) mags.push_back(std::fabs(v));
    if (mags.empty()) return series;
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    double sigma = mags[mags.size() / 2] / 0.6745;
    double thr = sigma * std::sqrt(2.0 * std::log(double(n)));

    for (auto& lvl : details)
        for (double& v : lvl) v = wavelet_detail::soft(v, thr);

    for (size_t lv = details.size(); lv-- > 0;)
        wavelet_detail::haar_inverse(approx, details[lv], lengths[lv]);
    return approx;
}

}  // namespace jb

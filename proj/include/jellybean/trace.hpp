#pragma once

#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "jellybean/common.hpp"

namespace jb {

// Time-indexed complex CSI samples per subcarrier for one link direction.
// Row-major [subcarrier][time]; the validity mask marks columns where no
// probe was decodable.
struct CsiTrace {
    int subcarriers = 0;                      // K
    int samples_per_probe = 0;                // alpha
    int probing_rounds = 0;                   // N_rounds
    double sample_rate = 3100.0;              // per subcarrier, Hz
    std::string owner;
    std::vector<std::complex<float>> samples; // K * width
    std::vector<uint8_t> validity;            // width

    int width() const { return samples_per_probe * probing_rounds; }

    std::complex<float>& at(int k, int t) { return samples[size_t(k) * width() + t]; }
    std::complex<float> at(int k, int t) const { return samples[size_t(k) * width() + t]; }

    double amplitude(int k, int t) const { return std::abs(at(k, t)); }

    size_t valid_count() const {
        size_t n = 0;
        for (auto v : validity) n += v != 0;
        return n;
    }
};

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::istream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw ParseError(std::string("trace file truncated while reading ") + what);
    return v;
}

}  // namespace detail

inline constexpr uint32_t kTraceMagic = 0x52545343;  // "CSTR" little-endian
inline constexpr uint32_t kTraceVersion = 1;

// Columnar binary layout: header (magic, version, K, alpha, N_rounds,
// sample rate, owner), float32 interleaved real/imag row-major, then the
// validity bitmap packed LSB-first.
inline void save_trace(const CsiTrace& tr, std::ostream& os) {
    detail::put<uint32_t>(os, kTraceMagic);
    detail::put<uint32_t>(os, kTraceVersion);
    detail::put<uint32_t>(os, uint32_t(tr.subcarriers));
    detail::put<uint32_t>(os, uint32_t(tr.samples_per_probe));
    detail::put<uint32_t>(os, uint32_t(tr.probing_rounds));
    detail::put<double>(os, tr.sample_rate);
    detail::put<uint32_t>(os, uint32_t(tr.owner.size()));
    os.write(tr.owner.data(), std::streamsize(tr.owner.size()));
    for (const auto& c : tr.samples) {
        detail::put<float>(os, c.real());
        detail::put<float>(os, c.imag());
    }
    const int w = tr.width();
    for (int base = 0; base < w; base += 8) {
        uint8_t byte = 0;
        for (int b = 0; b < 8 && base + b < w; ++b)
            if (tr.validity[base + b]) byte |= uint8_t(1u << b);
        detail::put<uint8_t>(os, byte);
    }
}

inline void save_trace(const CsiTrace& tr, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for write: " + path);
    save_trace(tr, f);
}

inline CsiTrace load_trace(std::istream& is) {
    if (detail::get<uint32_t>(is, "magic") != kTraceMagic)
        throw ParseError("not a CSI trace file (bad magic)");
    uint32_t version = detail::get<uint32_t>(is, "version");
    if (version != kTraceVersion)
        throw ParseError("unsupported trace version " + std::to_string(version));
    CsiTrace tr;
    tr.subcarriers = int(detail::get<uint32_t>(is, "subcarrier count"));
    tr.samples_per_probe = int(detail::get<uint32_t>(is, "samples per probe"));
    tr.probing_rounds = int(detail::get<uint32_t>(is, "probing rounds"));
    tr.sample_rate = detail::get<double>(is, "sample rate");
    uint32_t owner_len = detail::get<uint32_t>(is, "owner length");
    tr.owner.resize(owner_len);
    is.read(tr.owner.data(), owner_len);
    if (!is) throw ParseError("trace file truncated while reading owner id");
    const size_t total = size_t(tr.subcarriers) * tr.width();
    tr.samples.resize(total);
    for (auto& c : tr.samples) {
        float re = detail::get<float>(is, "sample body");
        float im = detail::get<float>(is, "sample body");
        c = {re, im};
    }
    const int w = tr.width();
    tr.validity.assign(w, 0);
    for (int base = 0; base < w; base += 8) {
        uint8_t byte = detail::get<uint8_t>(is, "validity bitmap");
        for (int b = 0; b < 8 && base + b < w; ++b)
            tr.validity[base + b] = (byte >> b) & 1u;
    }
    return tr;
}

inline CsiTrace load_trace(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for read: " + path);
    return load_trace(f);
}

// Debug CSV: one row per time index, amplitude per subcarrier.
inline void save_trace_csv(const CsiTrace& tr, std::ostream& os) {
    os << "t_index,valid";
    for (int k = 0; k < tr.subcarriers; ++k) os << ",amp_" << k;
    os << "\n";
    for (int t = 0; t < tr.width(); ++t) {
        os << t << "," << int(tr.validity[t]);
        for (int k = 0; k < tr.subcarriers; ++k) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), ",%.9g", tr.amplitude(k, t));
            os << buf;
        }
        os << "\n";
    }
}

inline void save_trace_csv(const CsiTrace& tr, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParseError("cannot open file for writing: " + path);
    save_trace_csv(tr, os);
}

}  // namespace jb

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "jellybean/common.hpp"
#include "jellybean/sha256.hpp"

namespace jb {

// xoshiro256++ with splitmix64 seeding. Fast enough to draw the tens of
// millions of noise samples a sounding run needs; never used as a global.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : s_) {
            // splitmix64 step
            x += 0x9E3779B97F4A7C15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            w = z ^ (z >> 31);
        }
    }

    uint64_t next_u64() {
        auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

    bool coin() { return next_u64() & 1; }

    // Standard normal via Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate) {
        double u;
        do { u = uniform(); } while (u <= 0.0);
        return -std::log(u) / rate;
    }

private:
    uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Labeled seed derivation: every random draw in a run traces back to the
// master seed through a hash tree, so scenarios are reproducible regardless
// of execution order.
inline uint64_t derive_seed(uint64_t master, const std::string& label) {
    std::vector<uint8_t> buf;
    buf.reserve(8 + label.size());
    for (int i = 0; i < 8; ++i) buf.push_back(uint8_t(master >> (8 * i)));
    buf.insert(buf.end(), label.begin(), label.end());
    auto d = sha256(buf.data(), buf.size());
    uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= uint64_t(d[i]) << (8 * i);
    return out;
}

}  // namespace jb

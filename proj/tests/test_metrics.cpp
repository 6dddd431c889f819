#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "jellybean/metrics.hpp"
#include "jellybean/rng.hpp"

using namespace jb;

namespace {

// Brute-force phi(m): wraparound m-bit pattern frequencies, sum p ln p.
double phi_oracle(const BitSeq& bits, int m) {
    if (m == 0) return 0.0;
    size_t n = bits.size();
    std::map<std::vector<uint8_t>, size_t> counts;
    for (size_t i = 0; i < n; ++i) {
        std::vector<uint8_t> pat(m);
        for (int j = 0; j < m; ++j) pat[j] = bits[(i + j) % n];
        ++counts[pat];
    }
    double s = 0.0;
    for (const auto& [pat, c] : counts) {
        double p = double(c) / double(n);
        s += p * std::log(p);
    }
    return s;
}

}  // namespace

TEST_CASE("bmr: hand values, symmetry, masks") {
    BitSeq a = bits_from_string("10110");
    BitSeq b = bits_from_string("10011");
    CHECK(bmr(a, b) == doctest::Approx(2.0 / 5.0));
    CHECK(bmr(a, b) == bmr(b, a));
    CHECK(bmr(a, a) == 0.0);

    std::vector<uint8_t> mask{1, 0, 1, 0, 1};
    CHECK(bmr(a, b, &mask) == doctest::Approx(2.0 / 3.0));  // positions 2 and 4 differ

    BitSeq c = bits_from_string("1011");
    CHECK_THROWS_AS(bmr(a, c), LengthMismatch);
    CHECK_THROWS_AS(bmr({}, {}), EmptyComparison);
}

TEST_CASE("bmr triangle inequality on random inputs") {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        BitSeq x(64), y(64), z(64);
        for (int i = 0; i < 64; ++i) {
            x[i] = rng.coin();
            y[i] = rng.coin();
            z[i] = rng.coin();
        }
        CHECK(bmr(x, z) <= bmr(x, y) + bmr(y, z) + 1e-12);
    }
}

TEST_CASE("bmr over the common prefix") {
    BitSeq a = bits_from_string("101101");
    BitSeq b = bits_from_string("1010");
    CHECK(bmr_common_prefix(a, b) == doctest::Approx(1.0 / 4.0));
    CHECK(bmr_common_prefix(b, a) == bmr_common_prefix(a, b));
}

TEST_CASE("sbr: bits per event") {
    Fingerprint f;
    f.bits = bits_from_string("1010101010");
    std::vector<ActivityEvent> schedule(4);
    for (auto& e : schedule) e.duration = 0.1;
    schedule[3].start = 100.0;  // outside the window
    CHECK(sbr(f, schedule, 90.0) == doctest::Approx(10.0 / 3.0));
    CHECK_THROWS_AS(sbr(f, {}, 90.0), NoActivity);
}

TEST_CASE("apen equals the brute-force phi computation") {
    Rng rng(17);
    for (int t = 0; t < 20; ++t) {
        BitSeq bits(512);
        for (auto& b : bits) b = rng.coin();
        for (int m : {1, 2, 3}) {
            double oracle = phi_oracle(bits, m) - phi_oracle(bits, m + 1);
            CHECK(apen(bits, m).apen == doctest::Approx(oracle).epsilon(1e-9));
        }
    }
}

TEST_CASE("apen reference vector: first 100 bits of e, m = 2") {
    BitSeq eps = bits_from_string(
        "1100100100001111110110101010001000100001011010001100001000110100"
        "110001001100011001100010100010111000");
    auto r = apen(eps, 2);
    CHECK(r.apen == doctest::Approx(0.665393219).epsilon(1e-6));
    CHECK(r.p_value == doctest::Approx(0.235301).epsilon(1e-4));
}

TEST_CASE("apen: alternating and constant inputs") {
    BitSeq alt(256), flat(256, 1);
    for (size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2;
    // perfectly regular sequences have ApEn near 0 and fail the test
    CHECK(apen(alt, 2).apen == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(apen(alt, 2).p_value < 0.01);
    CHECK(apen(flat, 2).p_value < 0.01);

    Rng rng(5);
    BitSeq rnd(4096);
    for (auto& b : rnd) b = rng.coin();
    CHECK(apen(rnd, 2).p_value > 0.01);
}

TEST_CASE("apen length guard") {
    BitSeq bits(7, 1);
    CHECK_THROWS_AS(apen(bits, 2), SequenceTooShort);  // needs n >= 2^{m+1}
    CHECK_NOTHROW(apen(BitSeq(8, 1), 2));
}

TEST_CASE("apen batch: random sequences pass in at least 98 of 100 seeds") {
    int pass = 0;
    for (int s = 0; s < 100; ++s) {
        Rng rng(1000 + s);
        BitSeq bits(10000);
        for (auto& b : bits) b = rng.coin();
        if (apen(bits, 2).p_value > 0.01) ++pass;
    }
    CHECK(pass >= 98);
}

TEST_CASE("apen stays within [0, ln 2] and orders regularity") {
    Rng rng(2024);
    BitSeq rnd(2048), period4(2048);
    for (size_t i = 0; i < rnd.size(); ++i) {
        rnd[i] = rng.coin();
        period4[i] = (i / 2) % 2;  // 0011 repeating
    }
    auto a_rnd = apen(rnd, 2).apen;
    auto a_per = apen(period4, 2).apen;
    CHECK(a_rnd >= 0.0);
    CHECK(a_rnd <= std::log(2.0) + 1e-12);
    CHECK(a_per < a_rnd);
}

TEST_CASE("apen p-values look uniform under the null (KS sanity)") {
    std::vector<double> pv;
    for (int s = 0; s < 500; ++s) {
        Rng rng(9000 + s);
        BitSeq bits(4096);
        for (auto& b : bits) b = rng.coin();
        pv.push_back(apen(bits, 2).p_value);
    }
    std::sort(pv.begin(), pv.end());
    double d = 0.0;
    size_t n = pv.size();
    for (size_t i = 0; i < n; ++i) {
        d = std::max(d, std::fabs(double(i + 1) / n - pv[i]));
        d = std::max(d, std::fabs(pv[i] - double(i) / n));
    }
    // asymptotic Kolmogorov tail: Q(x) = 2 sum (-1)^{j-1} exp(-2 j^2 x^2)
    double x = (std::sqrt(double(n)) + 0.12 + 0.11 / std::sqrt(double(n))) * d;
    double q = 0.0;
    for (int j = 1; j <= 100; ++j)
        q += 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * x * x);
    CHECK(q > 0.01);
}

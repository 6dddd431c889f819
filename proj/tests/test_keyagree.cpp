#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "jellybean/keyagree.hpp"
#include "jellybean/rng.hpp"

using namespace jb;

namespace {

Fingerprint random_fingerprint(size_t bits, uint64_t seed) {
    Fingerprint f;
    f.bits.resize(bits);
    Rng rng(seed);
    for (auto& b : f.bits) b = rng.coin();
    f.gray_bits = 4;
    return f;
}

// Flip bits so that exactly `n` symbols of the packed representation differ.
Fingerprint flip_symbols(const Fingerprint& f, const RsCode& code, int n, uint64_t seed) {
    Fingerprint g = f;
    Rng rng(seed);
    std::vector<int> idx(code.n);
    std::iota(idx.begin(), idx.end(), 0);
    for (size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
    for (int i = 0; i < n; ++i) {
        int bit = int(rng.uniform_int(uint64_t(code.symbol_bits)));
        g.bits[size_t(idx[i]) * code.symbol_bits + bit] ^= 1;
    }
    return g;
}

}  // namespace

TEST_CASE("commit/open round trip with identical fingerprints") {
    RsCode code{4, 15, 9};
    Fingerprint f = random_fingerprint(15 * 4, 3);
    auto [c, k] = commit(f, code, 77);
    auto opened = open_commitment(f, c, code);
    REQUIRE(opened.has_value());
    CHECK(*opened == k);
    CHECK(k.symbols.size() == 9);
}

TEST_CASE("commit is deterministic under a fixed seed") {
    RsCode code{4, 15, 9};
    Fingerprint f = random_fingerprint(15 * 4, 4);
    auto [c1, k1] = commit(f, code, 123);
    auto [c2, k2] = commit(f, code, 123);
    CHECK(c1.delta == c2.delta);
    CHECK(c1.key_hash == c2.key_hash);
    CHECK(k1 == k2);
    auto [c3, k3] = commit(f, code, 124);
    CHECK(!(k3 == k1));
}

TEST_CASE("delta XOR ENC(k) recovers the fingerprint symbols") {
    RsCode code{4, 15, 9};
    ReedSolomon rs(code);
    Fingerprint f = random_fingerprint(15 * 4, 5);
    auto [c, k] = commit(f, code, 9);
    Symbols cw = rs.encode(k.symbols);
    Symbols fs = fingerprint_symbols(f, code);
    for (int i = 0; i < code.n; ++i) CHECK((c.delta[i] ^ cw[i]) == fs[i]);
}

TEST_CASE("open succeeds iff the symbol distance is within t") {
    RsCode code{4, 15, 9};
    Fingerprint f = random_fingerprint(15 * 4, 6);
    auto [c, k] = commit(f, code, 11);
    for (int errs = 0; errs <= 3; ++errs)
        for (uint64_t s = 0; s < 30; ++s) {
            auto opened = open_commitment(flip_symbols(f, code, errs, 100 + s), c, code);
            REQUIRE(opened.has_value());
            CHECK(*opened == k);
        }
    for (int errs = 4; errs <= 8; ++errs)
        for (uint64_t s = 0; s < 30; ++s) {
            auto opened = open_commitment(flip_symbols(f, code, errs, 200 + s), c, code);
            CHECK(!opened.has_value());  // decode failure or hash mismatch
        }
}

TEST_CASE("random fingerprint at D aborts") {
    RsCode code{4, 15, 9};
    Fingerprint f = random_fingerprint(15 * 4, 7);
    auto [c, k] = commit(f, code, 13);
    for (uint64_t s = 0; s < 50; ++s)
        CHECK(!open_commitment(random_fingerprint(15 * 4, 300 + s), c, code).has_value());
}

TEST_CASE("short fingerprints are rejected exactly at the bit budget") {
    RsCode code{4, 15, 9};
    CHECK_THROWS_AS(commit(random_fingerprint(15 * 4 - 1, 8), code, 1), FingerprintTooShort);
    CHECK(!open_commitment(random_fingerprint(3, 8), Commitment{}, code).has_value());
    // longer fingerprints use the first n*m bits
    Fingerprint f = random_fingerprint(15 * 4 + 37, 9);
    auto [c, k] = commit(f, code, 2);
    CHECK(open_commitment(f, c, code).has_value());
}

TEST_CASE("delta looks uniform when the fingerprint is uniform (chi-square)") {
    RsCode code{4, 15, 9};
    std::vector<size_t> hist(16, 0);
    size_t total = 0;
    for (uint64_t s = 0; s < 600; ++s) {
        Fingerprint f = random_fingerprint(15 * 4, 10000 + s);
        auto [c, k] = commit(f, code, 20000 + s);
        for (uint16_t sym : c.delta) {
            ++hist[sym];
            ++total;
        }
    }
    double expected = double(total) / 16.0;
    double chi2 = 0.0;
    for (size_t h : hist) chi2 += (h - expected) * (h - expected) / expected;
    // chi-square with 15 dof: 0.999 quantile is 37.7
    CHECK(chi2 < 37.7);
}

TEST_CASE("pair_devices accepts identical traces with BMR zero") {
    CsiTrace tr;
    tr.subcarriers = 4;
    tr.samples_per_probe = 10;
    tr.probing_rounds = 3000;
    tr.sample_rate = 3100.0;
    tr.samples.resize(size_t(tr.subcarriers) * tr.width());
    Rng rng(31);
    for (int t = 0; t < tr.width(); ++t) {
        double burst = (t / 300) % 5 == 2 ? 0.4 : 1.0;
        for (int k = 0; k < 4; ++k)
            tr.at(k, t) = {float(burst + 0.01 * rng.normal()), 0.0f};
    }
    tr.validity.assign(tr.width(), 1);

    AfParams af;
    af.downsample_factor = 100;
    af.lsb_count = 3;
    RsCode code{4, 15, 9};
    auto out = pair_devices(tr, tr, af, code, 5);
    CHECK(out.accepted);
    CHECK(out.bmr == doctest::Approx(0.0));
    CHECK(out.key.has_value());
}

TEST_CASE("symbol packing is big-endian and order-preserving") {
    RsCode code{4, 15, 9};
    Fingerprint f;
    f.bits = bits_from_string("1000" "0001" "1111");
    f.bits.resize(15 * 4, 0);
    Symbols s = fingerprint_symbols(f, code);
    CHECK(s[0] == 0b1000);
    CHECK(s[1] == 0b0001);
    CHECK(s[2] == 0b1111);
    CHECK(s[3] == 0);
}

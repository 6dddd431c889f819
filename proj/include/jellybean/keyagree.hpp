#pragma once

#include <optional>
#include <vector>

#include "jellybean/common.hpp"
#include "jellybean/fingerprint.hpp"
#include "jellybean/metrics.hpp"
#include "jellybean/reed_solomon.hpp"
#include "jellybean/rng.hpp"
#include "jellybean/sha256.hpp"

namespace jb {

struct SecretKey {
    Symbols symbols;  // k field symbols

    // Big-endian bit packing of the k*m key bits, for hashing and export.
    std::vector<uint8_t> bytes(int symbol_bits) const {
        std::vector<uint8_t> out;
        int acc = 0, nbits = 0;
        for (uint16_t s : symbols) {
            for (int b = symbol_bits - 1; b >= 0; --b) {
                acc = (acc << 1) | ((s >> b) & 1);
                if (++nbits == 8) {
                    out.push_back(uint8_t(acc));
                    acc = 0;
                    nbits = 0;
                }
            }
        }
        if (nbits) out.push_back(uint8_t(acc << (8 - nbits)));
        return out;
    }

    bool operator==(const SecretKey&) const = default;
};

struct Commitment {
    Symbols delta;       // F_A-symbols XOR ENC_RS(k), n symbols
    Digest256 key_hash;  // SHA-256 of the packed key
};

// First n*m fingerprint bits packed big-endian into n field symbols.
// Shorter fingerprints abort: stretching would lower entropy, the caller
// must gather more activity instead.
inline Symbols fingerprint_symbols(const Fingerprint& f, const RsCode& code) {
    const size_t need = size_t(code.n) * code.symbol_bits;
    if (f.bits.size() < need)
        throw FingerprintTooShort("fingerprint has " + std::to_string(f.bits.size()) +
                                  " bits, need " + std::to_string(need));
    Symbols out(code.n, 0);
    for (size_t i = 0; i < need; ++i)
        out[i / code.symbol_bits] =
            uint16_t((out[i / code.symbol_bits] << 1) | f.bits[i]);
    return out;
}

inline std::pair<Commitment, SecretKey> commit(const Fingerprint& f_a, const RsCode& code,
                                               uint64_t rng_seed) {
    ReedSolomon rs(code);
    Rng rng(rng_seed);
    SecretKey key;
    key.symbols.resize(code.k);
    for (auto& s : key.symbols) s = uint16_t(rng.uniform_int(uint64_t(1) << code.symbol_bits));

    Symbols cw = rs.encode(key.symbols);
    Symbols fs = fingerprint_symbols(f_a, code);
    Commitment c;
    c.delta.resize(code.n);
    for (int i = 0; i < code.n; ++i) c.delta[i] = fs[i] ^ cw[i];
    c.key_hash = sha256(key.bytes(code.symbol_bits));
    return {c, key};
}

// Opens the commitment with the local fingerprint. nullopt = pairing abort
// (decode failure or hash mismatch).
inline std::optional<SecretKey> open_commitment(const Fingerprint& f_d, const Commitment& c,
                                                const RsCode& code) {
    Symbols fs;
    try {
        fs = fingerprint_symbols(f_d, code);
    } catch (const FingerprintTooShort&) {
        return std::nullopt;
    }
    Symbols word(code.n);
    for (int i = 0; i < code.n; ++i) word[i] = fs[i] ^ c.delta[i];
    ReedSolomon rs(code);
    auto msg = rs.decode(word);
    if (!msg) return std::nullopt;
    SecretKey key{*msg};
    if (sha256(key.bytes(code.symbol_bits)) != c.key_hash) return std::nullopt;
    return key;
}

struct PairingOutcome {
    bool accepted = false;
    std::optional<SecretKey> key;
    double bmr = 1.0;     // between the two fingerprints, over the committed bits
    size_t fingerprint_bits_a = 0;
    size_t fingerprint_bits_d = 0;
};

// Full protocol run over two already-collected traces: fingerprint both
// sides (with the Gray counter width agreed in the clear), commit at A,
// open at D.
inline PairingOutcome pair_devices(const CsiTrace& trace_a, const CsiTrace& trace_d,
                                   const AfParams& af, const RsCode& code, uint64_t seed) {
    Fingerprint fa = fingerprint(trace_a, af);
    Fingerprint fd = fingerprint(trace_d, af);
    if (fa.gray_bits != fd.gray_bits) {
        int shared = std::max(fa.gray_bits, fd.gray_bits);
        fa = fingerprint(trace_a, af, shared);
        fd = fingerprint(trace_d, af, shared);
    }

    PairingOutcome out;
    out.fingerprint_bits_a = fa.bits.size();
    out.fingerprint_bits_d = fd.bits.size();
    out.bmr = bmr_common_prefix(fa.bits, fd.bits);

    Commitment c;
    SecretKey k;
    try {
        std::tie(c, k) = commit(fa, code, derive_seed(seed, "key"));
    } catch (const FingerprintTooShort&) {
        return out;  // not enough activity gathered; pairing does not start
    }
    auto opened = open_commitment(fd, c, code);
    if (opened && *opened == k) {
        out.accepted = true;
        out.key = k;
    }
    return out;
}

// Wire layout: symbol width, length-prefixed delta symbols, 32-byte digest.
inline std::vector<uint8_t> serialize_commitment(const Commitment& c, const RsCode& code) {
    std::vector<uint8_t> out;
    out.push_back(uint8_t(code.symbol_bits));
    uint32_t n = uint32_t(c.delta.size());
    for (int i = 0; i < 4; ++i) out.push_back(uint8_t(n >> (8 * i)));
    for (uint16_t s : c.delta) out.push_back(uint8_t(s));
    out.insert(out.end(), c.key_hash.begin(), c.key_hash.end());
    return out;
}

inline Commitment deserialize_commitment(const std::vector<uint8_t>& buf) {
    if (buf.size() < 5) throw ParseError("commitment too short");
    uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n |= uint32_t(buf[1 + i]) << (8 * i);
    if (buf.size() != 5 + n + 32) throw ParseError("commitment length mismatch");
    Commitment c;
    c.delta.resize(n);
    for (uint32_t i = 0; i < n; ++i) c.delta[i] = buf[5 + i];
    std::copy(buf.end() - 32, buf.end(), c.key_hash.begin());
    return c;
}

}  // namespace jb

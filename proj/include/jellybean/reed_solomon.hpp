#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "jellybean/common.hpp"

namespace jb {

// GF(2^m) arithmetic over log/antilog tables, m in [2, 8].
class GaloisField {
public:
    explicit GaloisField(int m) : m_(m) {
        static constexpr uint32_t primitive[9] = {0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D};
        if (m < 2 || m > 8) throw InvalidParams("GF(2^m) supports m in [2, 8]");
        q_ = 1 << m;
        exp_.resize(2 * q_);
        log_.assign(q_, 0);
        uint32_t x = 1;
        for (int i = 0; i < q_ - 1; ++i) {
            exp_[i] = uint16_t(x);
            log_[x] = uint16_t(i);
            x <<= 1;
            if (x & q_) x ^= primitive[m];
        }
        for (int i = q_ - 1; i < 2 * q_; ++i) exp_[i] = exp_[i - (q_ - 1)];
    }

    int m() const { return m_; }
    int size() const { return q_; }

    uint16_t mul(uint16_t a, uint16_t b) const {
        if (a == 0 || b == 0) return 0;
        return exp_[log_[a] + log_[b]];
    }

    uint16_t div(uint16_t a, uint16_t b) const {
        if (b == 0) throw InvalidArgs("division by zero in GF");
        if (a == 0) return 0;
        return exp_[log_[a] + (q_ - 1) - log_[b]];
    }

    uint16_t inv(uint16_t a) const { return div(1, a); }

    // alpha^e for any integer exponent
    uint16_t alpha_pow(int e) const {
        e %= q_ - 1;
        if (e < 0) e += q_ - 1;
        return exp_[e];
    }

private:
    int m_, q_;
    std::vector<uint16_t> exp_;
    std::vector<uint16_t> log_;
};

struct RsCode {
    int symbol_bits = 8;  // m
    int n = 255;          // codeword symbols
    int k = 153;          // message symbols

    int t() const { return (n - k) / 2; }

    void validate() const {
        if (symbol_bits < 2 || symbol_bits > 8)
            throw InvalidParams("RS symbol width must be in [2, 8]");
        if (n > (1 << symbol_bits) - 1)
            throw InvalidParams("RS n exceeds field size");
        if (k < 1 || k >= n) throw InvalidParams("RS requires 1 <= k < n");
        if ((n - k) % 2 != 0) throw InvalidParams("RS n - k must be even");
        if (t() < 1) throw InvalidParams("RS must correct at least one error");
    }
};

using Symbols = std::vector<uint16_t>;

// Systematic Reed-Solomon codec. Codeword layout: message symbols followed
// by parity; generator roots alpha^1 .. alpha^(2t).
class ReedSolomon {
public:
    explicit ReedSolomon(const RsCode& code) : code_(code), gf_(code.symbol_bits) {
        code_.validate();
        const int r = code_.n - code_.k;
        gen_.assign(1, 1);
        for (int i = 1; i <= r; ++i) {
            // gen *= (x - alpha^i)
            Symbols next(gen_.size() + 1, 0);
            uint16_t root = gf_.alpha_pow(i);
            for (size_t j = 0; j < gen_.size(); ++j) {
                next[j] ^= gen_[j];
                next[j + 1] ^= gf_.mul(gen_[j], root);
            }
            gen_ = std::move(next);
        }
    }

    const RsCode& code() const { return code_; }
    const GaloisField& field() const { return gf_; }

    Symbols encode(const Symbols& message) const {
        if (int(message.size()) != code_.k)
            throw LengthMismatch("RS encode expects k = " + std::to_string(code_.k) + " symbols");
        const int r = code_.n - code_.k;
        Symbols parity(r, 0);
        for (uint16_t s : message) {
            if (s >= gf_.size()) throw InvalidArgs("symbol out of field range");
            uint16_t f = s ^ parity[0];
            for (int j = 0; j < r - 1; ++j)
                parity[j] = parity[j + 1] ^ gf_.mul(f, gen_[j + 1]);
            parity[r - 1] = gf_.mul(f, gen_[r]);
        }
        Symbols cw = message;
        cw.insert(cw.end(), parity.begin(), parity.end());
        return cw;
    }

    // Berlekamp-Massey + Chien + Forney. Returns the corrected message, or
    // nullopt when more than t errors are present and decoding fails. Note
    // that > t errors may also miscorrect to a different codeword; callers
    // are expected to verify integrity separately.
    std::optional<Symbols> decode(const Symbols& received) const {
        if (int(received.size()) != code_.n)
            throw LengthMismatch("RS decode expects n = " + std::to_string(code_.n) + " symbols");
        const int n = code_.n;
        const int r = n - code_.k;

        Symbols synd(r);
        bool clean = true;
        for (int j = 0; j < r; ++j) {
            synd[j] = poly_eval(received, gf_.alpha_pow(j + 1));
            if (synd[j]) clean = false;
        }
        if (clean) return Symbols(received.begin(), received.begin() + code_.k);

        // Berlekamp-Massey for the error locator Lambda.
        Symbols lambda{1}, prev{1};
        int L = 0, shift = 1;
        uint16_t b = 1;
        for (int it = 0; it < r; ++it) {
            uint16_t d = synd[it];
            for (int i = 1; i <= L && i < int(lambda.size()); ++i)
                d ^= gf_.mul(lambda[i], synd[it - i]);
            if (d == 0) {
                ++shift;
            } else if (2 * L <= it) {
                Symbols tmp = lambda;
                uint16_t coef = gf_.div(d, b);
                if (lambda.size() < prev.size() + shift) lambda.resize(prev.size() + shift, 0);
                for (size_t i = 0; i < prev.size(); ++i)
                    lambda[i + shift] ^= gf_.mul(coef, prev[i]);
                L = it + 1 - L;
                prev = std::move(tmp);
                b = d;
                shift = 1;
            } else {
                uint16_t coef = gf_.div(d, b);
                if (lambda.size() < prev.size() + shift) lambda.resize(prev.size() + shift, 0);
                for (size_t i = 0; i < prev.size(); ++i)
                    lambda[i + shift] ^= gf_.mul(coef, prev[i]);
                ++shift;
            }
        }
        while (!lambda.empty() && lambda.back() == 0) lambda.pop_back();
        int deg = int(lambda.size()) - 1;
        if (deg < 1 || deg > code_.t() || deg != L) return std::nullopt;

        // Chien search: roots of Lambda give error locators alpha^e,
        // e = n-1-pos for codeword index pos.
        std::vector<int> err_exp;
        for (int e = 0; e < n; ++e) {
            if (poly_eval_low_first(lambda, gf_.alpha_pow(-e)) == 0) err_exp.push_back(e);
        }
        if (int(err_exp.size()) != deg) return std::nullopt;

        // Omega = S(x) * Lambda(x) mod x^r, S stored low-order first.
        Symbols omega(r, 0);
        for (int i = 0; i < r; ++i) {
            if (synd[i] == 0) continue;
            for (size_t j = 0; j < lambda.size() && i + int(j) < r; ++j)
                omega[i + j] ^= gf_.mul(synd[i], lambda[j]);
        }

        Symbols corrected = received;
        for (int e : err_exp) {
            uint16_t x_inv = gf_.alpha_pow(-e);
            uint16_t num = poly_eval_low_first(omega, x_inv);
            uint16_t den = 0;  // formal derivative Lambda'(x_inv)
            for (size_t i = 1; i < lambda.size(); i += 2) {
                uint16_t term = lambda[i];
                // x_inv^(i-1)
                for (size_t p = 1; p < i; ++p) term = gf_.mul(term, x_inv);
                den ^= term;
            }
            if (den == 0) return std::nullopt;
            uint16_t magnitude = gf_.div(num, den);
            int pos = n - 1 - e;
            if (pos < 0 || pos >= n) return std::nullopt;
            corrected[pos] ^= magnitude;
        }

        for (int j = 0; j < r; ++j)
            if (poly_eval(corrected, gf_.alpha_pow(j + 1)) != 0) return std::nullopt;
        return Symbols(corrected.begin(), corrected.begin() + code_.k);
    }

private:
    // Horner over transmitted order: word[0] is the highest-degree coefficient.
    uint16_t poly_eval(const Symbols& word, uint16_t x) const {
        uint16_t acc = 0;
        for (uint16_t c : word) acc = gf_.mul(acc, x) ^ c;
        return acc;
    }

    // Horner for polynomials stored low-order-coefficient first.
    uint16_t poly_eval_low_first(const Symbols& poly, uint16_t x) const {
        uint16_t acc = 0;
        for (size_t i = poly.size(); i-- > 0;) acc = gf_.mul(acc, x) ^ poly[i];
        return acc;
    }

    RsCode code_;
    GaloisField gf_;
    Symbols gen_;
};

}  // namespace jb

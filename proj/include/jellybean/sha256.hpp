#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <vector>

#include <openssl/sha.h>

namespace jb {

using Digest256 = std::array<uint8_t, 32>;

inline Digest256 sha256(const uint8_t* data, size_t len) {
    Digest256 out{};
    SHA256(data, len, out.data());
    return out;
}

inline Digest256 sha256(const std::vector<uint8_t>& v) {
    return sha256(v.data(), v.size());
}

}  // namespace jb

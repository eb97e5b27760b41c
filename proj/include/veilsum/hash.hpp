#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "veilsum/bytes.hpp"

namespace veilsum {

using Digest32 = std::array<std::uint8_t, 32>;
using Digest16 = std::array<std::uint8_t, 16>;

Digest32 sha256(std::span<const std::uint8_t> data);

// Incremental SHA-256, used for transcript hashing.
class Sha256 {
public:
    Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;
    ~Sha256();

    Sha256& update(std::span<const std::uint8_t> data);
    Sha256& update(std::string_view s);
    Sha256& update_u32(std::uint32_t v);
    Sha256& update_u64(std::uint64_t v);
    Digest32 finish();  // one-shot; the object must not be reused afterwards

private:
    void* ctx_;
};

// First 16 bytes of SHA-256 over a domain tag plus payload. Used for key
// fingerprints.
Digest16 fingerprint16(std::string_view tag, std::span<const std::uint8_t> data);

// Counter-mode expansion of SHA-256 into an arbitrary-length mask
// (full-domain hashing for signatures, hash-to-group, challenge derivation).
Bytes hash_expand(std::string_view tag, std::span<const std::uint8_t> seed, std::size_t out_len);

}  // namespace veilsum

#include "veilsum/hash.hpp"

#include <openssl/evp.h>

#include <cstring>

#include "veilsum/errors.hpp"

namespace veilsum {

Digest32 sha256(std::span<const std::uint8_t> data) {
    Digest32 out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size())
        throw Error("sha256 failed");
    return out;
}

Sha256::Sha256() {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 init failed");
    ctx_ = ctx;
}

Sha256::~Sha256() {
    EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

Sha256& Sha256::update(std::span<const std::uint8_t> data) {
    if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size()) != 1)
        throw Error("sha256 update failed");
    return *this;
}

Sha256& Sha256::update(std::string_view s) {
    if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), s.data(), s.size()) != 1)
        throw Error("sha256 update failed");
    return *this;
}

Sha256& Sha256::update_u32(std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
    return update(std::span<const std::uint8_t>(b, 4));
}

Sha256& Sha256::update_u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
    return update(std::span<const std::uint8_t>(b, 8));
}

Digest32 Sha256::finish() {
    Digest32 out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len) != 1 ||
        len != out.size())
        throw Error("sha256 final failed");
    return out;
}

Digest16 fingerprint16(std::string_view tag, std::span<const std::uint8_t> data) {
    Sha256 h;
    h.update(tag).update(data);
    Digest32 full = h.finish();
    Digest16 out{};
    std::memcpy(out.data(), full.data(), out.size());
    return out;
}

Bytes hash_expand(std::string_view tag, std::span<const std::uint8_t> seed, std::size_t out_len) {
    Bytes out;
    out.reserve(out_len);
    std::uint32_t counter = 0;
    while (out.size() < out_len) {
        Sha256 h;
        h.update(tag).update(seed).update_u32(counter++);
        Digest32 block = h.finish();
        std::size_t take = std::min(block.size(), out_len - out.size());
        out.insert(out.end(), block.begin(), block.begin() + take);
    }
    return out;
}

}  // namespace veilsum

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "veilsum/errors.hpp"

namespace veilsum {

using Bytes = std::vector<std::uint8_t>;

std::string hex_encode(std::span<const std::uint8_t> data);
Bytes hex_decode(std::string_view hex);  // throws MalformedData

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

// Canonical serializer: fixed field order, u32 big-endian length prefixes.
// Every wire format in the project (keys, ciphertexts, envelopes, proofs,
// ledger payloads) goes through this pair so encodings stay bit-stable.
class ByteWriter {
public:
    void put_u8(std::uint8_t v) { out_.push_back(v); }
    void put_u32(std::uint32_t v);
    void put_u64(std::uint64_t v);
    void put_raw(std::span<const std::uint8_t> data);
    void put_blob(std::span<const std::uint8_t> data);  // u32 length + bytes
    void put_str(std::string_view s);

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t get_u8();
    std::uint32_t get_u32();
    std::uint64_t get_u64();
    Bytes get_raw(std::size_t n);
    Bytes get_blob();
    std::string get_str();

    template <std::size_t N>
    std::array<std::uint8_t, N> get_array() {
        Bytes b = get_raw(N);
        std::array<std::uint8_t, N> a{};
        std::memcpy(a.data(), b.data(), N);
        return a;
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    bool at_end() const { return remaining() == 0; }
    void require_end() const {
        if (!at_end()) throw MalformedData("trailing bytes after decode");
    }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace veilsum

#include "veilsum/bytes.hpp"

namespace veilsum {

static constexpr char kHexDigits[] = "0123456789abcdef";

std::string hex_encode(std::span<const std::uint8_t> data) {
    std::string s;
    s.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        s.push_back(kHexDigits[b >> 4]);
        s.push_back(kHexDigits[b & 0x0f]);
    }
    return s;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

Bytes hex_decode(std::string_view hex) {
    if (hex.size() % 2 != 0) throw MalformedData("hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw MalformedData("invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

void ByteWriter::put_u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::put_u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::put_raw(std::span<const std::uint8_t> data) {
    out_.insert(out_.end(), data.begin(), data.end());
}

void ByteWriter::put_blob(std::span<const std::uint8_t> data) {
    put_u32(static_cast<std::uint32_t>(data.size()));
    put_raw(data);
}

void ByteWriter::put_str(std::string_view s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
}

std::uint8_t ByteReader::get_u8() {
    if (remaining() < 1) throw MalformedData("unexpected end of input (u8)");
    return data_[pos_++];
}

std::uint32_t ByteReader::get_u32() {
    if (remaining() < 4) throw MalformedData("unexpected end of input (u32)");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return v;
}

std::uint64_t ByteReader::get_u64() {
    if (remaining() < 8) throw MalformedData("unexpected end of input (u64)");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
    return v;
}

Bytes ByteReader::get_raw(std::size_t n) {
    if (remaining() < n) throw MalformedData("unexpected end of input (raw)");
    Bytes b(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return b;
}

Bytes ByteReader::get_blob() {
    std::uint32_t n = get_u32();
    return get_raw(n);
}

std::string ByteReader::get_str() {
    Bytes b = get_blob();
    return std::string(b.begin(), b.end());
}

}  // namespace veilsum

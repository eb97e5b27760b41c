#include "veilsum/drbg.hpp"

#include "veilsum/errors.hpp"
#include "veilsum/mpzutil.hpp"

namespace veilsum {

static constexpr std::string_view kDomain = "veilsum-drbg/v1";

Drbg::Drbg(std::uint64_t seed) {
    Sha256 h;
    h.update(kDomain).update("/seed").update_u64(seed);
    key_ = h.finish();
}

Drbg::Drbg(std::span<const std::uint8_t> key_material) {
    Sha256 h;
    h.update(kDomain).update("/material").update(key_material);
    key_ = h.finish();
}

Drbg Drbg::child(std::string_view label) const {
    Sha256 h;
    h.update(kDomain).update("/child").update(std::span<const std::uint8_t>(key_)).update(label);
    Drbg c(std::uint64_t{0});
    c.key_ = h.finish();
    c.counter_ = 0;
    return c;
}

void Drbg::fill(std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
        Sha256 h;
        h.update(kDomain).update("/block").update(std::span<const std::uint8_t>(key_)).update_u64(counter_++);
        Digest32 block = h.finish();
        std::size_t take = std::min(block.size(), out.size() - done);
        std::copy(block.begin(), block.begin() + take, out.begin() + done);
        done += take;
    }
}

Bytes Drbg::bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
}

std::uint64_t Drbg::next_u64() {
    std::uint8_t b[8];
    fill(b);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | b[i];
    return v;
}

mpz_class Drbg::mpz_below(const mpz_class& bound) {
    if (bound <= 0) throw Error("mpz_below: bound must be positive");
    std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
    std::size_t nbytes = (bits + 7) / 8;
    unsigned top_mask = bits % 8 == 0 ? 0xff : (1u << (bits % 8)) - 1;
    // Rejection sampling keeps the distribution exactly uniform.
    for (;;) {
        Bytes raw = bytes(nbytes);
        raw[0] &= static_cast<std::uint8_t>(top_mask);
        mpz_class v = mpz_from_bytes(raw);
        if (v < bound) return v;
    }
}

mpz_class Drbg::mpz_bits(unsigned bits) {
    if (bits < 2) throw Error("mpz_bits: need at least 2 bits");
    std::size_t nbytes = (bits + 7) / 8;
    Bytes raw = bytes(nbytes);
    mpz_class v = mpz_from_bytes(raw);
    mpz_class one = 1;
    mpz_class top;
    mpz_pow_ui(top.get_mpz_t(), mpz_class(2).get_mpz_t(), bits - 1);
    v %= top;          // below 2^(bits-1)
    v += top;          // force top bit
    return v;
}

}  // namespace veilsum

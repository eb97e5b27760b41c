#include "veilsum/mpzutil.hpp"

#include <array>

#include "veilsum/drbg.hpp"
#include "veilsum/errors.hpp"
#include "veilsum/hash.hpp"

namespace veilsum {

Bytes mpz_to_bytes(const mpz_class& v) {
    if (v < 0) throw Error("mpz_to_bytes: negative value");
    if (v == 0) return {};
    std::size_t count = 0;
    std::size_t nbytes = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
    Bytes out(nbytes);
    mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
    out.resize(count);
    return out;
}

mpz_class mpz_from_bytes(std::span<const std::uint8_t> b) {
    mpz_class v;
    if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
    return v;
}

void put_mpz(ByteWriter& w, const mpz_class& v) {
    w.put_blob(mpz_to_bytes(v));
}

mpz_class get_mpz(ByteReader& r) {
    Bytes b = r.get_blob();
    if (!b.empty() && b[0] == 0) throw MalformedData("non-minimal integer encoding");
    return mpz_from_bytes(b);
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
    mpz_class out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return out;
}

mpz_class invmod(const mpz_class& a, const mpz_class& mod) {
    mpz_class out;
    if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0)
        throw Error("invmod: value not invertible");
    return out;
}

static const std::array<unsigned, 54> kSmallPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,
    47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
    191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251};

bool is_probable_prime(const mpz_class& n, int rounds) {
    if (n < 2) return false;
    for (unsigned p : kSmallPrimes) {
        if (n == p) return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
    }

    mpz_class d = n - 1;
    unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_tdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);

    // Witness stream is a pure function of the candidate.
    Drbg witness_rng(mpz_to_bytes(n));
    mpz_class n_minus_3 = n - 3;
    for (int i = 0; i < rounds; ++i) {
        mpz_class a = witness_rng.mpz_below(n_minus_3) + 2;  // in [2, n-2]
        mpz_class x = powm(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (unsigned long r = 1; r < s; ++r) {
            x = x * x % n;
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

mpz_class gen_prime(unsigned bits, Drbg& rng) {
    if (bits < 8) throw Error("gen_prime: need at least 8 bits");
    for (;;) {
        mpz_class cand = rng.mpz_bits(bits);
        mpz_setbit(cand.get_mpz_t(), 0);  // odd
        if (is_probable_prime(cand)) return cand;
    }
}

}  // namespace veilsum

#include "veilsum/group.hpp"

#include "veilsum/errors.hpp"
#include "veilsum/hash.hpp"
#include "veilsum/mpzutil.hpp"

namespace veilsum::zkp {

static constexpr std::string_view kGroupTag = "veilsum/group/v1";
static constexpr std::string_view kHashToGroupTag = "veilsum/h/v1";

// RFC 5114 section 2.1: 1024-bit MODP group with 160-bit prime order subgroup.
static const char* kP1024 =
    "B10B8F96A080E01DDE92DE5EAE5D54EC52C99FBCFB06A3C69A6A9DCA52D23B61"
    "6073E28675A23D189838EF1E2EE652C013ECB4AEA906112324975C3CD49B83BF"
    "ACCBDD7D90C4BD7098488E9C219A73724EFFD6FAE5644738FAA31A4FF55BCCC0"
    "A151AF5F0DC8B4BD45BF37DF365C1A65E68CFDA76D4DA708DF1FB2BC2E4A4371";
static const char* kG1024 =
    "A4D1CBD5C3FD34126765A442EFB99905F8104DD258AC507FD6406CFF14266D31"
    "266FEA1E5C41564B777E690F5504F213160217B4B01B886A5E91547F9E2749F4"
    "D7FBD7D3B9A92EE1909D0D2263F80A76A6A24C087A091F531DBF0A0169B6A28A"
    "D662A4D18E73AFA32D779D5918D08BC8858F4DCEF97C2A24855E6EEB22B3B2E5";
static const char* kQ1024 = "F518AA8781A8DF278ABA4E7D64B7CB9D49462353";

// RFC 5114 section 2.3: 2048-bit MODP group with 256-bit prime order subgroup.
static const char* kP2048 =
    "87A8E61DB4B6663CFFBBD19C651959998CEEF608660DD0F25D2CEED4435E3B00"
    "E00DF8F1D61957D4FAF7DF4561B2AA3016C3D91134096FAA3BF4296D830E9A7C"
    "209E0C6497517ABD5A8A9D306BCF67ED91F9E6725B4758C022E0B1EF4275BF7B"
    "6C5BFC11D45F9088B941F54EB1E59BB8BC39A0BF12307F5C4FDB70C581B23F76"
    "B63ACAE1CAA6B7902D52526735488A0EF13C6D9A51BFA4AB3AD8347796524D8E"
    "F6A167B5A41825D967E144E5140564251CCACB83E6B486F6B3CA3F7971506026"
    "C0B857F689962856DED4010ABD0BE621C3A3960A54E710C375F26375D7014103"
    "A4B54330C198AF126116D2276E11715F693877FAD7EF09CADB094AE91E1A1597";
static const char* kG2048 =
    "3FB32C9B73134D0B2E77506660EDBD484CA7B18F21EF205407F4793A1A0BA125"
    "10DBC15077BE463FFF4FED4AAC0BB555BE3A6C1B0C6B47B1BC3773BF7E8C6F62"
    "901228F8C28CBB18A55AE31341000A650196F931C77A57F2DDF463E5E9EC144B"
    "777DE62AAAB8A8628AC376D282D6ED3864E67982428EBC831D14348F6F2F9193"
    "B5045AF2767164E1DFC967C1FB3F2E55A4BD1BFFE83B9C80D052B985D182EA0A"
    "DB2A3B7313D3FE14C8484B1E052588B9B7D2BBD2DF016199ECD06E1557CD0915"
    "B3353BBB64E0EC377FD028370DF92B52C7891428CDC67EB6184B523D1DB246C3"
    "2F63078490F00EF8D647D148D47954515E2327CFEF98C582664B4C0F6CC41659";
static const char* kQ2048 = "8CF83642A709A097B447997640129DA299B1A47D1EB3750BA308B0FE64F5FBD3";

Bytes GroupParams::encode() const {
    ByteWriter w;
    w.put_str(kGroupTag);
    w.put_str(name);
    put_mpz(w, p);
    put_mpz(w, q);
    put_mpz(w, g);
    put_mpz(w, h);
    return w.take();
}

bool GroupParams::element_in_group(const mpz_class& x) const {
    if (x <= 0 || x >= p) return false;
    return powm(x, q, p) == 1;
}

mpz_class GroupParams::exp(const mpz_class& base, const mpz_class& e) const {
    if (e < 0) {
        mpz_class pos = (-e) % q;
        return invmod(powm(base, pos, p), p);
    }
    return powm(base, e, p);
}

mpz_class GroupParams::inv(const mpz_class& a) const {
    return invmod(a, p);
}

static mpz_class derive_h(const mpz_class& p, const mpz_class& q, const mpz_class& g) {
    mpz_class cofactor = (p - 1) / q;
    std::size_t p_len = mpz_to_bytes(p).size();
    std::uint32_t attempt = 0;
    for (;;) {
        ByteWriter seed;
        seed.put_blob(mpz_to_bytes(g));
        seed.put_u32(attempt++);
        mpz_class u = mpz_from_bytes(hash_expand(kHashToGroupTag, seed.bytes(), p_len + 16)) % p;
        mpz_class h = powm(u, cofactor, p);
        if (h != 1 && h != g) return h;
    }
}

static GroupParams make_group(const char* p_hex, const char* q_hex, const char* g_hex,
                              std::string name) {
    GroupParams gp;
    gp.p = mpz_class(p_hex, 16);
    gp.q = mpz_class(q_hex, 16);
    gp.g = mpz_class(g_hex, 16);
    gp.h = derive_h(gp.p, gp.q, gp.g);
    gp.name = std::move(name);
    return gp;
}

GroupParams group_setup(GroupProfile profile) {
    switch (profile) {
        case GroupProfile::test:
            return make_group(kP1024, kQ1024, kG1024, "modp-1024-160");
        case GroupProfile::full:
            return make_group(kP2048, kQ2048, kG2048, "modp-2048-256");
    }
    throw Error("group_setup: unknown profile");
}

GroupParams group_setup(std::string_view profile_name) {
    if (profile_name == "test") return group_setup(GroupProfile::test);
    if (profile_name == "full") return group_setup(GroupProfile::full);
    throw Error("group_setup: unknown profile name");
}

}  // namespace veilsum::zkp

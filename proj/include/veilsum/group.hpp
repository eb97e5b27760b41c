#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "veilsum/bytes.hpp"

namespace veilsum::zkp {

enum class GroupProfile { test, full };

// Prime-order subgroup of Z_p^* (published MODP parameters). g is the
// standardized generator; h is a second generator obtained by hashing g to
// the group, so its discrete log relative to g is unknown by construction.
struct GroupParams {
    mpz_class p;  // field prime
    mpz_class q;  // prime subgroup order, q | p-1
    mpz_class g;
    mpz_class h;
    std::string name;

    Bytes encode() const;

    // Membership in the order-q subgroup; rejects 0, 1 handled by callers
    // where the identity is not a legal value.
    bool element_in_group(const mpz_class& x) const;
    bool scalar_in_range(const mpz_class& s) const { return s >= 0 && s < q; }

    mpz_class mul(const mpz_class& a, const mpz_class& b) const { return a * b % p; }
    mpz_class exp(const mpz_class& base, const mpz_class& e) const;
    mpz_class inv(const mpz_class& a) const;
};

// Deterministic fixed parameters per profile. test: 1024-bit modulus with a
// 160-bit subgroup; full: 2048-bit modulus with a 256-bit subgroup.
GroupParams group_setup(GroupProfile profile);
GroupParams group_setup(std::string_view profile_name);  // "test" | "full"

}  // namespace veilsum::zkp

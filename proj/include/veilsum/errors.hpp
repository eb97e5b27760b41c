#pragma once

#include <stdexcept>
#include <string>

namespace veilsum {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Byte-level decoding failures (truncated input, bad length prefix, trailing bytes).
struct MalformedData : Error {
    using Error::Error;
};

// Envelope addressed to a different keypair than the one opening it.
struct WrongRecipient : Error {
    using Error::Error;
};

// Envelope body failed authentication: tampered or decrypted with garbage key.
struct CorruptEnvelope : Error {
    using Error::Error;
};

// Ciphertext or key material used under a key it was not produced for.
struct FingerprintMismatch : Error {
    using Error::Error;
};

// Range statement violates its invariants (empty, unsorted, overlapping).
struct StatementInvalid : Error {
    using Error::Error;
};

// Scenario/config validation failure; carries the offending field path.
struct ValidationError : Error {
    std::string field;
    ValidationError(std::string field_path, const std::string& what)
        : Error(field_path + ": " + what), field(std::move(field_path)) {}
};

}  // namespace veilsum

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ehrdeleg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Wrong-purpose key handed to a crypto operation.
struct PurposeError : Error { using Error::Error; };

// Malformed or wrong-width key material.
struct KeyError : Error { using Error::Error; };

// Authenticated decryption failed (tampered ciphertext or wrong key).
struct AuthenticityError : Error { using Error::Error; };

// Byte-level framing problems: bad widths, truncation, parse failures.
struct FormatError : Error { using Error::Error; };

struct ParameterError : Error { using Error::Error; };

struct NotFoundError : Error { using Error::Error; };

// Coalition does not cover the required key index sets.
struct InsufficientPartiesError : Error {
    std::vector<std::string> missing;
    InsufficientPartiesError(const std::string& msg, std::vector<std::string> missing_sets)
        : Error(msg), missing(std::move(missing_sets)) {}
};

// Two contributions carried the same label with different bytes.
struct InconsistencyError : Error { using Error::Error; };

// xor-derived cipher key fed to the cascade combiner, or vice versa.
struct ModeError : Error { using Error::Error; };

// Toy-only operation invoked under the production profile.
struct ProfileError : Error { using Error::Error; };

// Presentation holder does not match the credential subject.
struct BindingError : Error { using Error::Error; };

struct AuthorizationError : Error { using Error::Error; };

// Secure-channel delivery failure (bad sender signature, undecryptable).
struct TransportError : Error { using Error::Error; };

// Ledger payload failed its kind-specific validation.
struct ValidationError : Error { using Error::Error; };

struct ConfigError : Error { using Error::Error; };

}  // namespace ehrdeleg

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbdc {

enum class Errc {
    InvalidDenomination,
    WeakParameter,
    KeyMismatch,
    InvalidCertificate,
    UnknownKeyId,
    Malformed,
    HeightOutOfRange,
    NotLeader,
    ValidationFailed,
    UnknownNode,
    UnknownAccount,
    InsufficientFunds,
    InsufficientReserve,
    LimitExceeded,
    InvalidToken,
    DoubleSpend,
    ValueMismatch,
    IdentificationRequired,
    AlreadyClaimed,
    VintageExists,
    NotCommitted,
    AlreadyRedeemed,
    UnrepresentableAmount,
    BadSignature,
    InsufficientBalance,
    NoPendingSession,
    GapDetected,
    HashMismatch,
    ConfigError,
    AssertionFailed,
    Io,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library; the code carries the contract-level
/// error kind, the message carries human detail.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
    explicit Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace cbdc

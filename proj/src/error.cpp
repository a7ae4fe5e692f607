#include "cbdc/error.hpp"

namespace cbdc {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidDenomination: return "InvalidDenomination";
        case Errc::WeakParameter: return "WeakParameter";
        case Errc::KeyMismatch: return "KeyMismatch";
        case Errc::InvalidCertificate: return "InvalidCertificate";
        case Errc::UnknownKeyId: return "UnknownKeyId";
        case Errc::Malformed: return "Malformed";
        case Errc::HeightOutOfRange: return "HeightOutOfRange";
        case Errc::NotLeader: return "NotLeader";
        case Errc::ValidationFailed: return "ValidationFailed";
        case Errc::UnknownNode: return "UnknownNode";
        case Errc::UnknownAccount: return "UnknownAccount";
        case Errc::InsufficientFunds: return "InsufficientFunds";
        case Errc::InsufficientReserve: return "InsufficientReserve";
        case Errc::LimitExceeded: return "LimitExceeded";
        case Errc::InvalidToken: return "InvalidToken";
        case Errc::DoubleSpend: return "DoubleSpend";
        case Errc::ValueMismatch: return "ValueMismatch";
        case Errc::IdentificationRequired: return "IdentificationRequired";
        case Errc::AlreadyClaimed: return "AlreadyClaimed";
        case Errc::VintageExists: return "VintageExists";
        case Errc::NotCommitted: return "NotCommitted";
        case Errc::AlreadyRedeemed: return "AlreadyRedeemed";
        case Errc::UnrepresentableAmount: return "UnrepresentableAmount";
        case Errc::BadSignature: return "BadSignature";
        case Errc::InsufficientBalance: return "InsufficientBalance";
        case Errc::NoPendingSession: return "NoPendingSession";
        case Errc::GapDetected: return "GapDetected";
        case Errc::HashMismatch: return "HashMismatch";
        case Errc::ConfigError: return "ConfigError";
        case Errc::AssertionFailed: return "AssertionFailed";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace cbdc

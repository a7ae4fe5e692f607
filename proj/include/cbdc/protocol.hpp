#pragma once

// Wallet <-> MSB exchanges. A wallet never sends anything that outlives one
// session: blinded messages, token ids and keys of the tokens being spent,
// authorizations, and optionally a per-transaction identity attestation.

#include "cbdc/blindsig.hpp"
#include "cbdc/bytes.hpp"
#include "cbdc/token.hpp"
#include "cbdc/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cbdc {

/// MSB -> wallet: what a spend will be bound to. The wallet fills in the
/// input total itself.
struct Quote {
    NodeId destination = 0;
    std::uint64_t nonce = 0;
    TimeMs timestamp = 0;

    SpendContext context(Amount input_total) const { return {destination, nonce, input_total, timestamp}; }

    Bytes encode() const;
    static Quote decode(ByteView data);
};

/// Wallet -> MSB. The account being debited is named by the authenticated
/// customer channel, not by the wallet.
struct WithdrawalRequest {
    std::vector<BlindedMessage> outputs;

    Bytes encode() const;
    static WithdrawalRequest decode(ByteView data);
};

/// Wallet -> MSB. The destination account is the payee's, chosen at the MSB.
struct DepositSubmission {
    std::vector<SpendInput> inputs;
    /// Fresh blinded outputs returning the overshoot to the payer.
    std::vector<BlindedMessage> change;

    Bytes encode() const;
    static DepositSubmission decode(ByteView data);
};

/// Payer and payee wallets -> MSB, assembled by the payer.
struct MediationRequest {
    std::vector<SpendInput> inputs;
    std::vector<BlindedMessage> outputs;
    /// Opaque, transaction-scoped; kept in the MSB record store only.
    std::optional<Bytes> id_attestation;

    Bytes encode() const;
    static MediationRequest decode(ByteView data);
};

/// MSB -> wallet after commit.
struct SignatureResponse {
    std::vector<BlindSignature> signatures;

    Bytes encode() const;
    static SignatureResponse decode(ByteView data);
};

/// One transmitted field, for transcript scans. `shared` marks public
/// parameters (issuer key ids, widths) that are identical for everybody.
struct TranscriptField {
    std::string name;
    Bytes value;
    bool shared = false;
};

std::vector<TranscriptField> fields_of(const WithdrawalRequest& m);
std::vector<TranscriptField> fields_of(const DepositSubmission& m);
std::vector<TranscriptField> fields_of(const MediationRequest& m);

}  // namespace cbdc

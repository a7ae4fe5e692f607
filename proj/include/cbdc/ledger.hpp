#pragma once

#include "cbdc/blindsig.hpp"
#include "cbdc/bytes.hpp"
#include "cbdc/crypto.hpp"
#include "cbdc/genesis.hpp"
#include "cbdc/serialize.hpp"
#include "cbdc/token.hpp"
#include "cbdc/types.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

namespace cbdc {

enum class EntryType : std::uint8_t {
    Withdrawal = 1,
    Deposit = 2,
    MediatedTransfer = 3,
    Disbursement = 4,
    ReserveExchange = 5,
};

std::string_view to_string(EntryType t) noexcept;

enum class ReserveDirection : std::uint8_t {
    /// MSB moves central bank reserves into its issuance reserve.
    Fund = 1,
    /// MSB takes reserves back out.
    Drain = 2,
};

// Payloads carry account commitments (salted hashes), never account ids.

struct WithdrawalPayload {
    Hash256 account_commitment;
    Amount amount = 0;
    std::vector<BlindedMessage> outputs;
};

struct DepositPayload {
    std::vector<SpendInput> inputs;
    Hash256 account_commitment;
    Amount credit = 0;
    /// Fresh blinded outputs returned to the payer when inputs overshoot.
    std::vector<BlindedMessage> change;
};

struct MediatedTransferPayload {
    std::vector<SpendInput> inputs;
    std::vector<BlindedMessage> outputs;
    Amount fee = 0;
    bool id_flag = false;
};

struct DisbursementPayload {
    Hash256 treasury_commitment;
    Hash256 claim_ref;
    Amount amount = 0;
    std::vector<BlindedMessage> outputs;
};

struct ReserveExchangePayload {
    NodeId msb = 0;
    Amount amount = 0;
    ReserveDirection direction = ReserveDirection::Fund;
};

using Payload = std::variant<WithdrawalPayload, DepositPayload, MediatedTransferPayload,
                             DisbursementPayload, ReserveExchangePayload>;

struct LedgerEntry {
    NodeId submitter = 0;
    std::uint64_t nonce = 0;
    TimeMs timestamp = 0;
    Payload payload;
    Signature signature;

    EntryType type() const;
    /// Canonical bytes covered by the submitter signature.
    Bytes signing_bytes() const;
    Bytes encode() const;
    static LedgerEntry decode(ByteView data);
    static LedgerEntry read(Reader& r);
    void write(Writer& w) const;
    Hash256 hash() const;
    void sign(const SigningKey& key);

    /// Spent inputs of a Deposit or MediatedTransfer; empty otherwise.
    const std::vector<SpendInput>& inputs() const;
    /// Freshly issued blinded outputs (withdrawal, disbursement, mediated
    /// outputs, deposit change); empty otherwise.
    const std::vector<BlindedMessage>& outputs() const;
};

enum class RejectCode : std::uint8_t {
    None = 0,
    BadSignature,
    UnauthorizedSubmitter,
    Malformed,
    UnknownKeyId,
    InvalidSpend,
    ValueMismatch,
    PolicyViolation,
    DuplicateNonce,
    DoubleSpend,
    InsufficientReserve,
    AlreadyClaimed,
};

std::string_view to_string(RejectCode c) noexcept;

enum class PolicyRule : std::uint8_t {
    None = 0,
    MsbWithdrawalVelocity,
    IdThreshold,
    Fee,
};

std::string_view to_string(PolicyRule r) noexcept;

/// Accept, or Reject with a reason. Canonical: no free text.
struct Verdict {
    RejectCode code = RejectCode::None;
    PolicyRule rule = PolicyRule::None;
    /// The offending token for DoubleSpend / InvalidSpend.
    TokenId token;

    static Verdict accept() { return {}; }
    static Verdict reject(RejectCode c, PolicyRule r = PolicyRule::None, TokenId t = {}) {
        return {c, r, t};
    }
    bool accepted() const { return code == RejectCode::None; }
    std::string describe() const;
    bool operator==(const Verdict&) const = default;
};

/// One position in the ordered log. Rejected entries are kept with their
/// reason so that every replica and the regulator see the same history.
struct LogRecord {
    std::uint64_t height = 0;
    LedgerEntry entry;
    Hash256 entry_hash;
    Verdict outcome;
    Hash256 state_hash;
    Hash256 chain_hash;

    void write(Writer& w) const;
    static LogRecord read(Reader& r);
};

Hash256 chain_link(const Hash256& previous, std::uint64_t height, const Hash256& entry_hash,
                   const Verdict& outcome, const Hash256& state_hash);

struct KeyTotals {
    Amount issued = 0;
    Amount redeemed = 0;
    Amount outstanding() const { return issued - redeemed; }
    bool operator==(const KeyTotals&) const = default;
};

struct AuditCheckpoint {
    std::uint64_t height = 0;
    Hash256 chain_hash;
    Hash256 state_hash;
};

struct AuditBatch {
    std::uint64_t from_height = 0;
    std::vector<LogRecord> records;
    std::vector<AuditCheckpoint> checkpoints;

    Bytes encode() const;
    static AuditBatch decode(ByteView data);
};

struct LedgerOptions {
    /// Keep every LogRecord; turned off for long benchmarks.
    bool retain_log = true;
    std::uint64_t checkpoint_interval = 1000;
};

/// Minimum fee for a mediated transfer: the base fee, plus the exchange fee
/// when some input vintage does not appear among the outputs.
Amount required_mediated_fee(const PolicyConfig& policy, const std::vector<std::uint32_t>& in_vintages,
                             const std::vector<std::uint32_t>& out_vintages);

/// Replicated ledger state: a pure fold of execute() over the ordered log.
class LedgerState {
public:
    explicit LedgerState(std::shared_ptr<const Genesis> genesis, LedgerOptions options = {});

    const Genesis& genesis() const { return *genesis_; }
    std::shared_ptr<const Genesis> genesis_ptr() const { return genesis_; }

    /// Checks that depend only on the entry and genesis: submitter, signature,
    /// structure, certificates, spend authorizations, value balance and the
    /// static policy rules.
    Verdict validate_stateless(const LedgerEntry& entry) const;
    /// Full validation. `stateless_checked` skips the stateless part when the
    /// caller already ran it on this exact entry.
    Verdict validate(const LedgerEntry& entry, bool stateless_checked = false) const;
    /// Applies an accepted entry; throws ValidationFailed otherwise.
    const LogRecord& apply(const LedgerEntry& entry);
    /// Validates, then applies or records the rejection.
    const LogRecord& execute(const LedgerEntry& entry, bool stateless_checked = false);

    std::uint64_t height() const { return height_; }
    const Hash256& chain_head() const { return chain_head_; }
    Hash256 state_hash() const;
    const std::vector<LogRecord>& log() const { return log_; }
    const LogRecord& last_record() const { return last_; }
    /// Records with height > from_height plus checkpoints. Throws
    /// HeightOutOfRange when from_height exceeds the current height.
    AuditBatch audit_stream(std::uint64_t from_height) const;

    Amount reserve(NodeId msb) const;
    const std::map<NodeId, Amount>& reserves() const { return reserves_; }
    const std::map<KeyId, KeyTotals>& totals() const { return totals_; }
    KeyTotals totals(const KeyId& key) const;
    const SpentSet& spent() const { return spent_; }
    bool claimed(const Hash256& claim_ref) const { return claims_.contains(claim_ref); }
    bool nonce_used(NodeId submitter, std::uint64_t nonce) const;
    Amount withdrawn_in_day(NodeId msb, TimeMs at) const;
    std::uint64_t accepted_count() const { return accepted_; }
    std::uint64_t rejected_count() const { return height_ - accepted_; }

    /// Total value of an entry's spent inputs, or nullopt if a key is unknown.
    std::optional<Amount> input_value(const LedgerEntry& entry) const;
    SpendContext spend_context(const LedgerEntry& entry) const;

private:
    Verdict validate_stateful(const LedgerEntry& entry) const;
    const LogRecord& apply_accepted(const LedgerEntry& entry);
    const LogRecord& push_record(const LedgerEntry& entry, Hash256 entry_hash, Verdict outcome);
    Amount denomination(const KeyId& key) const;

    std::shared_ptr<const Genesis> genesis_;
    LedgerOptions options_;

    std::uint64_t height_ = 0;
    std::uint64_t accepted_ = 0;
    Hash256 chain_head_;
    std::vector<LogRecord> log_;
    LogRecord last_;
    std::vector<AuditCheckpoint> checkpoints_;

    SpentSet spent_;
    Hash256 spent_acc_;
    std::map<NodeId, Amount> reserves_;
    std::map<KeyId, KeyTotals> totals_;
    std::map<NodeId, std::pair<std::uint64_t, Amount>> velocity_;
    std::set<Hash256> claims_;
    Hash256 claims_acc_;
    std::map<NodeId, std::unordered_set<std::uint64_t>> nonces_;
    Hash256 nonce_acc_;
};

inline Verdict validate_entry(const LedgerState& state, const LedgerEntry& entry) {
    return state.validate(entry);
}
inline const LogRecord& apply_entry(LedgerState& state, const LedgerEntry& entry) {
    return state.apply(entry);
}
inline AuditBatch audit_stream(const LedgerState& state, std::uint64_t from_height) {
    return state.audit_stream(from_height);
}

}  // namespace cbdc

#pragma once

#include "cbdc/genesis.hpp"
#include "cbdc/ledger.hpp"
#include "cbdc/protocol.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cbdc {

enum class KycTier : std::uint8_t { Basic, Verified };

std::string_view to_string(KycTier t) noexcept;
KycTier kyc_tier_from_string(std::string_view s);

/// Salted commitment standing in for an account on the ledger. The salt is
/// private to the MSB holding the account.
Hash256 account_commitment(const Hash256& salt, std::string_view account_id);

struct Account {
    std::string id;
    Amount balance = 0;
    KycTier tier = KycTier::Basic;
    Hash256 commitment;
    /// Day index the counters below belong to.
    std::uint64_t day = 0;
    Amount withdrawn_today = 0;
    Amount deposited_today = 0;
};

/// What an MSB keeps about one submitted entry. Deposit records describe the
/// destination side only.
struct MsbRecord {
    Hash256 entry_hash;
    EntryType type = EntryType::Withdrawal;
    std::uint64_t nonce = 0;
    TimeMs timestamp = 0;
    /// Debited account (withdrawal, disbursement) or credited account (deposit).
    std::string account;
    Amount amount = 0;
    std::size_t token_count = 0;
    Hash256 claim_ref;
    /// Mediated transfers above the threshold: the attestation received.
    std::optional<Bytes> id_attestation;
    std::optional<Verdict> outcome;

    nlohmann::json to_json() const;
};

/// A money services business: customer accounts, its view of its own
/// reserve, and construction of every entry type it submits. Entries are
/// handed back to the caller for submission; on_commit settles them.
class Msb {
public:
    Msb(std::shared_ptr<const Genesis> genesis, NodeId id, SigningKey key, Hash256 account_salt,
        std::optional<std::filesystem::path> record_file = std::nullopt);

    NodeId id() const { return id_; }
    const Hash256& salt() const { return salt_; }
    Hash256 commitment_for(std::string_view account_id) const { return account_commitment(salt_, account_id); }

    Account& open_account(std::string account_id, KycTier tier, Amount balance = 0);
    /// Throws UnknownAccount.
    const Account& account(std::string_view account_id) const;
    bool has_account(std::string_view account_id) const { return accounts_.contains(std::string(account_id)); }
    const std::map<std::string, Account, std::less<>>& accounts() const { return accounts_; }

    /// Committed reserve as seen from the ledger, and what is left after holds.
    Amount reserve() const { return reserve_; }
    Amount available_reserve() const { return reserve_ - std::min(reserve_, reserve_held_); }

    /// Fixes nonce and time for a wallet's spend.
    Quote quote(TimeMs now);

    /// Throws UnknownAccount, InsufficientFunds, LimitExceeded,
    /// InsufficientReserve or UnknownKeyId.
    LedgerEntry request_withdrawal(std::string_view account_id, const WithdrawalRequest& request,
                                   TimeMs now);
    /// Throws UnknownAccount, InvalidToken, LimitExceeded or ValueMismatch.
    LedgerEntry receive_deposit(const Quote& quote, const DepositSubmission& submission,
                                std::string_view dest_account);
    /// Throws InvalidToken, ValueMismatch or IdentificationRequired.
    LedgerEntry mediate_transfer(const Quote& quote, const MediationRequest& request);
    /// Charged to `treasury_account`. Throws IdentificationRequired,
    /// AlreadyClaimed, UnknownAccount, InsufficientFunds or InsufficientReserve.
    LedgerEntry disburse(const Hash256& claim_ref, bool verified_identity,
                         const std::vector<BlindedMessage>& outputs, std::string_view treasury_account,
                         TimeMs now);

    /// Every committed record, in log order.
    void on_commit(const LogRecord& record);

    /// Verdict for an entry this MSB submitted, once committed.
    std::optional<Verdict> outcome(const Hash256& entry_hash) const;
    const std::vector<MsbRecord>& records() const { return records_; }
    std::size_t pending() const { return holds_.size(); }

private:
    struct Hold {
        std::size_t record = 0;
        std::string account;
        Amount debit = 0;
        Amount credit = 0;
        Amount reserve = 0;
        std::uint64_t day = 0;
    };

    Account& find_account(std::string_view account_id);
    void roll(Account& a, TimeMs now) const;
    const Quote& take_quote(const Quote& quote);
    Amount output_value(const std::vector<BlindedMessage>& outputs) const;
    std::pair<Amount, std::vector<std::uint32_t>> check_inputs(const Quote& quote,
                                                               const std::vector<SpendInput>& inputs) const;
    LedgerEntry finish(std::uint64_t nonce, TimeMs ts, Payload payload, MsbRecord record, Hold hold);
    void persist(const MsbRecord& record);

    std::shared_ptr<const Genesis> genesis_;
    NodeId id_;
    SigningKey key_;
    Hash256 salt_;
    std::optional<std::filesystem::path> record_file_;

    std::map<std::string, Account, std::less<>> accounts_;
    std::map<std::uint64_t, Quote> quotes_;
    std::uint64_t next_nonce_ = 1;
    Amount reserve_ = 0;
    Amount reserve_held_ = 0;
    std::set<Hash256> claims_seen_;
    std::map<Hash256, Hold> holds_;
    std::map<Hash256, std::size_t> by_hash_;
    std::vector<MsbRecord> records_;
};

}  // namespace cbdc

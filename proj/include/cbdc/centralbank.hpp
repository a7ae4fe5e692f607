#pragma once

#include "cbdc/blindsig.hpp"
#include "cbdc/genesis.hpp"
#include "cbdc/ledger.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cbdc {

nlohmann::json issuer_key_to_json(const IssuerPublicKey& key);
/// Recomputes the key id; throws KeyMismatch if it disagrees.
IssuerPublicKey issuer_key_from_json(const nlohmann::json& j);

/// Published at provisioning: everything a verifier needs for one vintage.
struct EpochRecord {
    std::string issuer_label;
    std::uint32_t vintage = 0;
    DenominationSet denominations;
    std::vector<IssuerPublicKey> keys;

    nlohmann::json to_json() const;
    static EpochRecord from_json(const nlohmann::json& j);
};

/// The sole issuer. It sits beside consensus as a non-voting observer: all
/// issuance and redemption happens in on_commit, once per committed entry.
/// Its inputs are blinded messages and already-spent token ids, so it never
/// sees which wallet holds what.
class CentralBank {
public:
    CentralBank(std::string issuer_label, SigningKey key);

    const std::string& issuer_label() const { return label_; }
    const SigningKey& key() const { return key_; }

    /// One key pair per denomination, derived from `seed`. Throws VintageExists.
    EpochRecord provision_vintage(std::uint32_t vintage, const DenominationSet& denominations,
                                  unsigned security_bits, std::uint64_t seed,
                                  KeyProfile profile = KeyProfile::Test);
    const EpochRecord& epoch(std::uint32_t vintage) const;
    const IssuerKeyPair& issuer_key(const KeyId& id) const;
    /// Public keys of every provisioned vintage.
    IssuerRegistry registry() const;

    /// Starts the reserve mirror from a genesis built over this bank's keys.
    void attach(std::shared_ptr<const Genesis> genesis);

    /// Throws UnknownKeyId or InsufficientReserve. Debits the MSB reserve.
    std::vector<BlindSignature> sign_withdrawal(NodeId msb, const std::vector<BlindedMessage>& blinded,
                                                const std::vector<KeyId>& key_ids);
    /// Tokens must be inputs of a committed entry. Throws NotCommitted or
    /// AlreadyRedeemed. Credits the MSB reserve.
    void redeem(NodeId msb, const std::vector<TokenId>& tokens, const std::vector<KeyId>& key_ids);

    /// Idempotent per entry hash.
    void on_commit(const LogRecord& record);

    /// Blind signatures issued for a committed entry's outputs.
    const std::vector<BlindSignature>* signatures_for(const Hash256& entry_hash) const;

    /// Signs a reserve exchange for submission to consensus.
    LedgerEntry reserve_exchange(NodeId msb, Amount amount, ReserveDirection direction, TimeMs now);

    Amount reserve(NodeId msb) const;
    const std::map<NodeId, Amount>& reserves() const { return reserves_; }
    const std::map<KeyId, KeyTotals>& totals() const { return totals_; }
    KeyTotals totals(const KeyId& key) const;
    std::size_t redeemed_count() const { return redeemed_.size(); }

private:
    std::string label_;
    SigningKey key_;
    std::map<std::uint32_t, EpochRecord> epochs_;
    std::map<KeyId, IssuerKeyPair> keys_;
    std::shared_ptr<const Genesis> genesis_;

    std::map<NodeId, Amount> reserves_;
    std::map<KeyId, KeyTotals> totals_;
    std::unordered_set<TokenId, DigestHash> committed_inputs_;
    std::unordered_set<TokenId, DigestHash> redeemed_;
    std::unordered_map<Hash256, std::vector<BlindSignature>, DigestHash> issued_;
    std::unordered_set<Hash256, DigestHash> seen_;
    std::uint64_t next_nonce_ = 1;
};

}  // namespace cbdc

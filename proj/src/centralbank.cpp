#include "cbdc/centralbank.hpp"

#include "cbdc/bigint.hpp"
#include "cbdc/error.hpp"

#include <nlohmann/json.hpp>

namespace cbdc {

nlohmann::json issuer_key_to_json(const IssuerPublicKey& key) {
    return {
        {"key_id", key.key_id.hex()},
        {"denomination", key.denomination},
        {"vintage", key.vintage},
        {"bits", key.bits},
        {"n", bigint_to_hex(key.n)},
        {"e", bigint_to_hex(key.e)},
    };
}

IssuerPublicKey issuer_key_from_json(const nlohmann::json& j) {
    IssuerPublicKey k;
    k.denomination = j.at("denomination").get<Amount>();
    k.vintage = j.at("vintage").get<std::uint32_t>();
    k.bits = j.at("bits").get<unsigned>();
    k.n = bigint_from_hex(j.at("n").get<std::string>());
    k.e = bigint_from_hex(j.at("e").get<std::string>());
    k.key_id = compute_key_id(k.n, k.e, k.denomination, k.vintage);
    if (k.key_id != KeyId::from_hex_string(j.at("key_id").get<std::string>())) {
        throw Error(Errc::KeyMismatch, "issuer key id does not match its parameters");
    }
    return k;
}

nlohmann::json EpochRecord::to_json() const {
    nlohmann::json keys_json = nlohmann::json::array();
    for (const auto& k : keys) {
        keys_json.push_back(issuer_key_to_json(k));
    }
    return {
        {"issuer_label", issuer_label},
        {"vintage", vintage},
        {"denominations", denominations.values()},
        {"keys", keys_json},
    };
}

EpochRecord EpochRecord::from_json(const nlohmann::json& j) {
    EpochRecord r;
    r.issuer_label = j.at("issuer_label").get<std::string>();
    r.vintage = j.at("vintage").get<std::uint32_t>();
    r.denominations = DenominationSet(j.at("denominations").get<std::vector<Amount>>());
    for (const auto& k : j.at("keys")) {
        r.keys.push_back(issuer_key_from_json(k));
    }
    return r;
}

CentralBank::CentralBank(std::string issuer_label, SigningKey key)
    : label_(std::move(issuer_label)), key_(std::move(key)) {}

EpochRecord CentralBank::provision_vintage(std::uint32_t vintage, const DenominationSet& denominations,
                                           unsigned security_bits, std::uint64_t seed,
                                           KeyProfile profile) {
    if (epochs_.contains(vintage)) {
        throw Error(Errc::VintageExists, std::to_string(vintage));
    }
    if (denominations.empty()) {
        throw Error(Errc::InvalidDenomination, "empty denomination set");
    }
    EpochRecord rec{label_, vintage, denominations, {}};
    std::vector<IssuerKeyPair> fresh;
    for (auto d : denominations.values()) {
        fresh.push_back(keygen(d, vintage, security_bits, seed, denominations, profile));
        rec.keys.push_back(fresh.back().pub());
    }
    for (auto& k : fresh) {
        auto id = k.key_id();
        keys_.emplace(id, std::move(k));
    }
    return epochs_.emplace(vintage, std::move(rec)).first->second;
}

const EpochRecord& CentralBank::epoch(std::uint32_t vintage) const {
    auto it = epochs_.find(vintage);
    if (it == epochs_.end()) throw Error(Errc::UnknownKeyId, "vintage " + std::to_string(vintage));
    return it->second;
}

const IssuerKeyPair& CentralBank::issuer_key(const KeyId& id) const {
    auto it = keys_.find(id);
    if (it == keys_.end()) throw Error(Errc::UnknownKeyId, id.short_hex());
    return it->second;
}

IssuerRegistry CentralBank::registry() const {
    IssuerRegistry r;
    for (const auto& [id, k] : keys_) {
        r.add(k.pub());
    }
    return r;
}

void CentralBank::attach(std::shared_ptr<const Genesis> genesis) {
    if (genesis->central_bank_key != key_.verify_key()) {
        throw Error(Errc::KeyMismatch, "genesis names a different central bank key");
    }
    for (const auto& [id, pub] : genesis->issuers.keys()) {
        if (!keys_.contains(id)) throw Error(Errc::UnknownKeyId, "genesis key not provisioned here");
        totals_[id];
    }
    reserves_.clear();
    for (const auto& v : genesis->validators) {
        reserves_[v.id] = v.initial_reserve;
    }
    genesis_ = std::move(genesis);
}

std::vector<BlindSignature> CentralBank::sign_withdrawal(NodeId msb, const std::vector<BlindedMessage>& blinded,
                                                         const std::vector<KeyId>& key_ids) {
    if (blinded.size() != key_ids.size()) {
        throw Error(Errc::Malformed, "one key id per blinded message");
    }
    Amount total = 0;
    for (std::size_t i = 0; i < blinded.size(); ++i) {
        if (blinded[i].key_id != key_ids[i]) throw Error(Errc::UnknownKeyId, "key id mismatch");
        total += issuer_key(key_ids[i]).pub().denomination;
    }
    if (reserve(msb) < total) {
        throw Error(Errc::InsufficientReserve,
                    "msb " + std::to_string(msb) + ": " + std::to_string(reserve(msb)) + " < " +
                        std::to_string(total));
    }
    std::vector<BlindSignature> out;
    out.reserve(blinded.size());
    for (std::size_t i = 0; i < blinded.size(); ++i) {
        const auto& k = issuer_key(key_ids[i]);
        out.push_back(sign_blinded(blinded[i], k));
        totals_[key_ids[i]].issued += k.pub().denomination;
    }
    reserves_[msb] -= total;
    return out;
}

void CentralBank::redeem(NodeId msb, const std::vector<TokenId>& tokens, const std::vector<KeyId>& key_ids) {
    if (tokens.size() != key_ids.size()) {
        throw Error(Errc::Malformed, "one key id per token");
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!committed_inputs_.contains(tokens[i])) throw Error(Errc::NotCommitted, tokens[i].short_hex());
        if (redeemed_.contains(tokens[i])) throw Error(Errc::AlreadyRedeemed, tokens[i].short_hex());
        issuer_key(key_ids[i]);
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto d = issuer_key(key_ids[i]).pub().denomination;
        redeemed_.insert(tokens[i]);
        totals_[key_ids[i]].redeemed += d;
        reserves_[msb] += d;
    }
}

void CentralBank::on_commit(const LogRecord& record) {
    if (!seen_.insert(record.entry_hash).second || !record.outcome.accepted()) return;
    const auto& e = record.entry;

    if (const auto* x = std::get_if<ReserveExchangePayload>(&e.payload)) {
        auto& r = reserves_[x->msb];
        r = x->direction == ReserveDirection::Fund ? r + x->amount : r - x->amount;
        return;
    }
    // Redeem first: a deposit's change is paid for by its own inputs.
    std::vector<TokenId> ids;
    std::vector<KeyId> keys;
    for (const auto& in : e.inputs()) {
        committed_inputs_.insert(in.token_id);
        ids.push_back(in.token_id);
        keys.push_back(in.certificate.key_id);
    }
    if (!ids.empty()) redeem(e.submitter, ids, keys);

    const auto& outs = e.outputs();
    if (!outs.empty()) {
        std::vector<KeyId> out_keys;
        for (const auto& o : outs) {
            out_keys.push_back(o.key_id);
        }
        issued_.emplace(record.entry_hash, sign_withdrawal(e.submitter, outs, out_keys));
    }
}

const std::vector<BlindSignature>* CentralBank::signatures_for(const Hash256& entry_hash) const {
    auto it = issued_.find(entry_hash);
    return it == issued_.end() ? nullptr : &it->second;
}

LedgerEntry CentralBank::reserve_exchange(NodeId msb, Amount amount, ReserveDirection direction, TimeMs now) {
    LedgerEntry e;
    e.submitter = kCentralBankId;
    e.nonce = next_nonce_++;
    e.timestamp = now;
    e.payload = ReserveExchangePayload{msb, amount, direction};
    e.sign(key_);
    return e;
}

Amount CentralBank::reserve(NodeId msb) const {
    auto it = reserves_.find(msb);
    return it == reserves_.end() ? 0 : it->second;
}

KeyTotals CentralBank::totals(const KeyId& key) const {
    auto it = totals_.find(key);
    return it == totals_.end() ? KeyTotals{} : it->second;
}

}  // namespace cbdc

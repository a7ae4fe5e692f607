#include "cbdc/msb.hpp"

#include "cbdc/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

namespace cbdc {

std::string_view to_string(KycTier t) noexcept {
    return t == KycTier::Verified ? "verified" : "basic";
}

KycTier kyc_tier_from_string(std::string_view s) {
    if (s == "basic") return KycTier::Basic;
    if (s == "verified") return KycTier::Verified;
    throw Error(Errc::ConfigError, "unknown kyc tier '" + std::string(s) + "'");
}

Hash256 account_commitment(const Hash256& salt, std::string_view account_id) {
    return Sha256().update("cbdc/account/v1").update(salt).update(account_id).finish();
}

nlohmann::json MsbRecord::to_json() const {
    nlohmann::json j{
        {"entry", entry_hash.hex()},
        {"type", to_string(type)},
        {"nonce", nonce},
        {"timestamp", timestamp},
        {"account", account},
        {"amount", amount},
        {"tokens", token_count},
    };
    if (type == EntryType::Disbursement) j["claim_ref"] = claim_ref.hex();
    if (id_attestation) j["id_attestation"] = to_hex(*id_attestation);
    if (outcome) j["outcome"] = outcome->accepted() ? "accepted" : outcome->describe();
    return j;
}

Msb::Msb(std::shared_ptr<const Genesis> genesis, NodeId id, SigningKey key, Hash256 account_salt,
         std::optional<std::filesystem::path> record_file)
    : genesis_(std::move(genesis)), id_(id), key_(std::move(key)), salt_(account_salt),
      record_file_(std::move(record_file)) {
    const auto* v = genesis_->validator(id_);
    if (v == nullptr) {
        throw Error(Errc::UnknownNode, "msb " + std::to_string(id_) + " not in genesis");
    }
    if (v->key != key_.verify_key()) {
        throw Error(Errc::KeyMismatch, "msb signing key does not match genesis");
    }
    reserve_ = v->initial_reserve;
}

Account& Msb::open_account(std::string account_id, KycTier tier, Amount balance) {
    if (accounts_.contains(account_id)) {
        throw Error(Errc::ConfigError, "account '" + account_id + "' already open");
    }
    Account a;
    a.id = account_id;
    a.tier = tier;
    a.balance = balance;
    a.commitment = commitment_for(account_id);
    return accounts_.emplace(std::move(account_id), std::move(a)).first->second;
}

Account& Msb::find_account(std::string_view account_id) {
    auto it = accounts_.find(account_id);
    if (it == accounts_.end()) throw Error(Errc::UnknownAccount, std::string(account_id));
    return it->second;
}

const Account& Msb::account(std::string_view account_id) const {
    auto it = accounts_.find(account_id);
    if (it == accounts_.end()) throw Error(Errc::UnknownAccount, std::string(account_id));
    return it->second;
}

void Msb::roll(Account& a, TimeMs now) const {
    auto day = now / genesis_->policy.day_ms;
    if (a.day != day) {
        a.day = day;
        a.withdrawn_today = 0;
        a.deposited_today = 0;
    }
}

Quote Msb::quote(TimeMs now) {
    Quote q{id_, next_nonce_++, now};
    quotes_.emplace(q.nonce, q);
    return q;
}

const Quote& Msb::take_quote(const Quote& quote) {
    auto it = quotes_.find(quote.nonce);
    if (quote.destination != id_ || it == quotes_.end() || it->second.timestamp != quote.timestamp) {
        throw Error(Errc::Malformed, "quote not issued by msb " + std::to_string(id_));
    }
    return it->second;
}

Amount Msb::output_value(const std::vector<BlindedMessage>& outputs) const {
    Amount total = 0;
    for (const auto& o : outputs) {
        const auto* k = genesis_->issuers.find(o.key_id);
        if (k == nullptr) throw Error(Errc::UnknownKeyId, o.key_id.short_hex());
        if (o.width != k->modulus_bytes() || o.value < 0 || o.value >= k->n) {
            throw Error(Errc::Malformed, "blinded output out of range");
        }
        total += k->denomination;
    }
    return total;
}

std::pair<Amount, std::vector<std::uint32_t>> Msb::check_inputs(
    const Quote& quote, const std::vector<SpendInput>& inputs) const {
    if (inputs.empty()) throw Error(Errc::InvalidToken, "no inputs");
    Amount total = 0;
    std::vector<std::uint32_t> vintages;
    std::set<TokenId> seen;
    for (const auto& in : inputs) {
        const auto* k = genesis_->issuers.find(in.certificate.key_id);
        if (k == nullptr) throw Error(Errc::InvalidToken, "unknown issuer key");
        if (!seen.insert(in.token_id).second) throw Error(Errc::InvalidToken, "token repeated");
        total += k->denomination;
        vintages.push_back(k->vintage);
    }
    auto ctx = quote.context(total);
    for (const auto& in : inputs) {
        if (!verify_spend(in, ctx, genesis_->issuers.at(in.certificate.key_id))) {
            throw Error(Errc::InvalidToken, in.token_id.short_hex());
        }
    }
    return {total, std::move(vintages)};
}

LedgerEntry Msb::finish(std::uint64_t nonce, TimeMs ts, Payload payload, MsbRecord record, Hold hold) {
    LedgerEntry e;
    e.submitter = id_;
    e.nonce = nonce;
    e.timestamp = ts;
    e.payload = std::move(payload);
    e.sign(key_);

    record.entry_hash = e.hash();
    record.type = e.type();
    record.nonce = nonce;
    record.timestamp = ts;
    hold.record = records_.size();
    by_hash_[record.entry_hash] = records_.size();
    records_.push_back(std::move(record));
    holds_.emplace(records_.back().entry_hash, std::move(hold));
    return e;
}

LedgerEntry Msb::request_withdrawal(std::string_view account_id, const WithdrawalRequest& request,
                                    TimeMs now) {
    auto& a = find_account(account_id);
    if (request.outputs.empty()) throw Error(Errc::Malformed, "empty withdrawal");
    auto amount = output_value(request.outputs);
    roll(a, now);
    if (amount > a.balance) {
        throw Error(Errc::InsufficientFunds, a.id + ": " + std::to_string(amount) + " > " +
                                                 std::to_string(a.balance));
    }
    const auto cap = genesis_->policy.account_daily_withdrawal_cap;
    if (a.withdrawn_today + amount > cap) {
        throw Error(Errc::LimitExceeded, "daily withdrawal cap " + std::to_string(cap));
    }
    if (amount > available_reserve()) {
        throw Error(Errc::InsufficientReserve, "msb " + std::to_string(id_));
    }

    a.balance -= amount;
    a.withdrawn_today += amount;
    reserve_held_ += amount;

    WithdrawalPayload p{a.commitment, amount, request.outputs};
    MsbRecord rec;
    rec.account = a.id;
    rec.amount = amount;
    rec.token_count = request.outputs.size();
    return finish(next_nonce_++, now, std::move(p), std::move(rec),
                  Hold{0, a.id, amount, 0, amount, a.day});
}

LedgerEntry Msb::receive_deposit(const Quote& quote, const DepositSubmission& submission,
                                 std::string_view dest_account) {
    auto& a = find_account(dest_account);
    const auto q = take_quote(quote);
    auto [in_value, vintages] = check_inputs(q, submission.inputs);
    auto change = output_value(submission.change);
    if (change > in_value) throw Error(Errc::ValueMismatch, "change exceeds inputs");
    auto credit = in_value - change;
    roll(a, q.timestamp);
    const auto cap = genesis_->policy.account_daily_deposit_cap;
    if (a.tier == KycTier::Basic && a.deposited_today + credit > cap) {
        throw Error(Errc::LimitExceeded, "daily deposit cap " + std::to_string(cap));
    }
    quotes_.erase(q.nonce);
    a.deposited_today += credit;

    DepositPayload p{submission.inputs, a.commitment, credit, submission.change};
    MsbRecord rec;
    rec.account = a.id;
    rec.amount = credit;
    rec.token_count = submission.inputs.size();
    return finish(q.nonce, q.timestamp, std::move(p), std::move(rec), Hold{0, a.id, 0, credit, 0, a.day});
}

LedgerEntry Msb::mediate_transfer(const Quote& quote, const MediationRequest& request) {
    const auto q = take_quote(quote);
    auto [in_value, in_vintages] = check_inputs(q, request.inputs);
    if (request.outputs.empty()) throw Error(Errc::Malformed, "no outputs");
    auto out_value = output_value(request.outputs);
    std::vector<std::uint32_t> out_vintages;
    for (const auto& o : request.outputs) {
        out_vintages.push_back(genesis_->issuers.at(o.key_id).vintage);
    }
    auto fee = required_mediated_fee(genesis_->policy, in_vintages, out_vintages);
    if (in_value < out_value || in_value - out_value < fee) {
        throw Error(Errc::ValueMismatch, std::to_string(in_value) + " < " +
                                             std::to_string(out_value) + " + fee " + std::to_string(fee));
    }
    if (in_value >= genesis_->policy.id_threshold && !request.id_attestation) {
        throw Error(Errc::IdentificationRequired,
                    "value " + std::to_string(in_value) + " at or above threshold");
    }
    quotes_.erase(q.nonce);

    MediatedTransferPayload p{request.inputs, request.outputs, in_value - out_value,
                              request.id_attestation.has_value()};
    MsbRecord rec;
    rec.amount = in_value;
    rec.token_count = request.inputs.size();
    rec.id_attestation = request.id_attestation;
    return finish(q.nonce, q.timestamp, std::move(p), std::move(rec), Hold{});
}

LedgerEntry Msb::disburse(const Hash256& claim_ref, bool verified_identity,
                          const std::vector<BlindedMessage>& outputs, std::string_view treasury_account,
                          TimeMs now) {
    if (!verified_identity) throw Error(Errc::IdentificationRequired, "claimant not verified");
    if (claims_seen_.contains(claim_ref)) throw Error(Errc::AlreadyClaimed, claim_ref.short_hex());
    auto& t = find_account(treasury_account);
    if (outputs.empty()) throw Error(Errc::Malformed, "empty disbursement");
    auto amount = output_value(outputs);
    if (amount > t.balance) throw Error(Errc::InsufficientFunds, t.id);
    if (amount > available_reserve()) throw Error(Errc::InsufficientReserve, "msb " + std::to_string(id_));

    t.balance -= amount;
    reserve_held_ += amount;
    claims_seen_.insert(claim_ref);

    DisbursementPayload p{t.commitment, claim_ref, amount, outputs};
    MsbRecord rec;
    rec.account = t.id;
    rec.amount = amount;
    rec.token_count = outputs.size();
    rec.claim_ref = claim_ref;
    roll(t, now);
    return finish(next_nonce_++, now, std::move(p), std::move(rec), Hold{0, t.id, amount, 0, amount, t.day});
}

void Msb::on_commit(const LogRecord& record) {
    const auto& e = record.entry;
    const bool ok = record.outcome.accepted();
    if (ok) {
        if (e.submitter == id_) {
            for (const auto& in : e.inputs()) {
                reserve_ += genesis_->issuers.at(in.certificate.key_id).denomination;
            }
            for (const auto& out : e.outputs()) {
                reserve_ -= genesis_->issuers.at(out.key_id).denomination;
            }
        }
        if (const auto* x = std::get_if<ReserveExchangePayload>(&e.payload); x && x->msb == id_) {
            reserve_ = x->direction == ReserveDirection::Fund ? reserve_ + x->amount : reserve_ - x->amount;
        }
        if (const auto* d = std::get_if<DisbursementPayload>(&e.payload)) {
            claims_seen_.insert(d->claim_ref);
        }
    }

    auto it = holds_.find(record.entry_hash);
    if (it == holds_.end()) return;
    auto hold = std::move(it->second);
    holds_.erase(it);
    auto& rec = records_[hold.record];
    rec.outcome = record.outcome;
    reserve_held_ -= hold.reserve;
    if (!hold.account.empty()) {
        auto& a = find_account(hold.account);
        if (ok) {
            a.balance += hold.credit;
        } else {
            a.balance += hold.debit;
            if (a.day == hold.day) {
                if (e.type() == EntryType::Withdrawal) a.withdrawn_today -= hold.debit;
                if (e.type() == EntryType::Deposit) a.deposited_today -= hold.credit;
            }
        }
    }
    if (!ok && e.type() == EntryType::Disbursement && record.outcome.code != RejectCode::AlreadyClaimed) {
        claims_seen_.erase(rec.claim_ref);
    }
    persist(rec);
}

std::optional<Verdict> Msb::outcome(const Hash256& entry_hash) const {
    auto it = by_hash_.find(entry_hash);
    if (it == by_hash_.end()) return std::nullopt;
    return records_[it->second].outcome;
}

void Msb::persist(const MsbRecord& record) {
    if (!record_file_) return;
    std::ofstream out(*record_file_, std::ios::app);
    if (!out) throw Error(Errc::Io, "cannot append to " + record_file_->string());
    out << record.to_json().dump() << '\n';
}

}  // namespace cbdc

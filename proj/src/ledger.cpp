#include "cbdc/ledger.hpp"

#include "cbdc/error.hpp"

#include <algorithm>
#include <string>

namespace cbdc {

namespace {

constexpr std::string_view kEntryTag = "cbdc/entry/v1";

void write_outputs(Writer& w, const std::vector<BlindedMessage>& outs) {
    w.u32(static_cast<std::uint32_t>(outs.size()));
    for (const auto& o : outs) {
        write_blinded(w, o);
    }
}

std::vector<BlindedMessage> read_outputs(Reader& r) {
    auto n = r.count(36);
    std::vector<BlindedMessage> outs;
    outs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        outs.push_back(read_blinded(r));
    }
    return outs;
}

void write_inputs(Writer& w, const std::vector<SpendInput>& ins) {
    w.u32(static_cast<std::uint32_t>(ins.size()));
    for (const auto& in : ins) {
        write_spend_input(w, in);
    }
}

std::vector<SpendInput> read_inputs(Reader& r) {
    auto n = r.count(200);
    std::vector<SpendInput> ins;
    ins.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        ins.push_back(read_spend_input(r));
    }
    return ins;
}

void write_payload(Writer& w, const Payload& payload) {
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, WithdrawalPayload>) {
                w.digest(p.account_commitment).u64(p.amount);
                write_outputs(w, p.outputs);
            } else if constexpr (std::is_same_v<T, DepositPayload>) {
                write_inputs(w, p.inputs);
                w.digest(p.account_commitment).u64(p.credit);
                write_outputs(w, p.change);
            } else if constexpr (std::is_same_v<T, MediatedTransferPayload>) {
                write_inputs(w, p.inputs);
                write_outputs(w, p.outputs);
                w.u64(p.fee).boolean(p.id_flag);
            } else if constexpr (std::is_same_v<T, DisbursementPayload>) {
                w.digest(p.treasury_commitment).digest(p.claim_ref).u64(p.amount);
                write_outputs(w, p.outputs);
            } else {
                w.u32(p.msb).u64(p.amount).u8(static_cast<std::uint8_t>(p.direction));
            }
        },
        payload);
}

Payload read_payload(EntryType type, Reader& r) {
    switch (type) {
        case EntryType::Withdrawal: {
            WithdrawalPayload p;
            p.account_commitment = r.digest<HashTag>();
            p.amount = r.u64();
            p.outputs = read_outputs(r);
            return p;
        }
        case EntryType::Deposit: {
            DepositPayload p;
            p.inputs = read_inputs(r);
            p.account_commitment = r.digest<HashTag>();
            p.credit = r.u64();
            p.change = read_outputs(r);
            return p;
        }
        case EntryType::MediatedTransfer: {
            MediatedTransferPayload p;
            p.inputs = read_inputs(r);
            p.outputs = read_outputs(r);
            p.fee = r.u64();
            p.id_flag = r.boolean();
            return p;
        }
        case EntryType::Disbursement: {
            DisbursementPayload p;
            p.treasury_commitment = r.digest<HashTag>();
            p.claim_ref = r.digest<HashTag>();
            p.amount = r.u64();
            p.outputs = read_outputs(r);
            return p;
        }
        case EntryType::ReserveExchange: {
            ReserveExchangePayload p;
            p.msb = r.u32();
            p.amount = r.u64();
            auto dir = r.u8();
            if (dir != 1 && dir != 2) {
                throw Error(Errc::Malformed, "reserve direction");
            }
            p.direction = static_cast<ReserveDirection>(dir);
            return p;
        }
    }
    throw Error(Errc::Malformed, "entry type");
}

const std::vector<SpendInput> kNoInputs;
const std::vector<BlindedMessage> kNoOutputs;

bool submitter_may_write(const Genesis& g, const LedgerEntry& e) {
    if (e.type() == EntryType::ReserveExchange) {
        return e.submitter == kCentralBankId;
    }
    return g.validator(e.submitter) != nullptr;
}

const VerifyKey* submitter_key(const Genesis& g, NodeId id) {
    if (id == kCentralBankId) {
        return &g.central_bank_key;
    }
    const auto* v = g.validator(id);
    return v == nullptr ? nullptr : &v->key;
}

Hash256 accumulate(const Hash256& acc, ByteView item) {
    return Sha256{}.update(acc).update(item).finish();
}

}  // namespace

std::string_view to_string(EntryType t) noexcept {
    switch (t) {
        case EntryType::Withdrawal: return "Withdrawal";
        case EntryType::Deposit: return "Deposit";
        case EntryType::MediatedTransfer: return "MediatedTransfer";
        case EntryType::Disbursement: return "Disbursement";
        case EntryType::ReserveExchange: return "ReserveExchange";
    }
    return "Unknown";
}

std::string_view to_string(RejectCode c) noexcept {
    switch (c) {
        case RejectCode::None: return "Accept";
        case RejectCode::BadSignature: return "BadSignature";
        case RejectCode::UnauthorizedSubmitter: return "UnauthorizedSubmitter";
        case RejectCode::Malformed: return "Malformed";
        case RejectCode::UnknownKeyId: return "UnknownKeyId";
        case RejectCode::InvalidSpend: return "InvalidSpend";
        case RejectCode::ValueMismatch: return "ValueMismatch";
        case RejectCode::PolicyViolation: return "PolicyViolation";
        case RejectCode::DuplicateNonce: return "DuplicateNonce";
        case RejectCode::DoubleSpend: return "DoubleSpend";
        case RejectCode::InsufficientReserve: return "InsufficientReserve";
        case RejectCode::AlreadyClaimed: return "AlreadyClaimed";
    }
    return "Unknown";
}

std::string_view to_string(PolicyRule r) noexcept {
    switch (r) {
        case PolicyRule::None: return "None";
        case PolicyRule::MsbWithdrawalVelocity: return "MsbWithdrawalVelocity";
        case PolicyRule::IdThreshold: return "IdThreshold";
        case PolicyRule::Fee: return "Fee";
    }
    return "Unknown";
}

std::string Verdict::describe() const {
    std::string out(to_string(code));
    if (code == RejectCode::PolicyViolation) {
        out += "(" + std::string(to_string(rule)) + ")";
    } else if (code == RejectCode::DoubleSpend || code == RejectCode::InvalidSpend) {
        out += "(" + token.short_hex() + ")";
    }
    return out;
}

EntryType LedgerEntry::type() const { return static_cast<EntryType>(payload.index() + 1); }

void LedgerEntry::write(Writer& w) const {
    w.raw(signing_bytes());
    w.raw(signature.view());
}

Bytes LedgerEntry::signing_bytes() const {
    Writer w;
    w.str(kEntryTag).u8(static_cast<std::uint8_t>(type())).u32(submitter).u64(nonce).u64(timestamp);
    write_payload(w, payload);
    return w.take();
}

Bytes LedgerEntry::encode() const {
    Writer w;
    write(w);
    return w.take();
}

LedgerEntry LedgerEntry::read(Reader& r) {
    if (r.str() != kEntryTag) {
        throw Error(Errc::Malformed, "entry tag");
    }
    LedgerEntry e;
    auto type = r.u8();
    if (type < 1 || type > 5) {
        throw Error(Errc::Malformed, "entry type");
    }
    e.submitter = r.u32();
    e.nonce = r.u64();
    e.timestamp = r.u64();
    e.payload = read_payload(static_cast<EntryType>(type), r);
    auto sig = r.raw(64);
    std::copy(sig.begin(), sig.end(), e.signature.bytes.begin());
    return e;
}

LedgerEntry LedgerEntry::decode(ByteView data) {
    Reader r(data);
    auto e = read(r);
    r.expect_done();
    return e;
}

Hash256 LedgerEntry::hash() const { return sha256(encode()); }

void LedgerEntry::sign(const SigningKey& key) { signature = key.sign(signing_bytes()); }

const std::vector<SpendInput>& LedgerEntry::inputs() const {
    if (const auto* d = std::get_if<DepositPayload>(&payload)) return d->inputs;
    if (const auto* m = std::get_if<MediatedTransferPayload>(&payload)) return m->inputs;
    return kNoInputs;
}

const std::vector<BlindedMessage>& LedgerEntry::outputs() const {
    if (const auto* w = std::get_if<WithdrawalPayload>(&payload)) return w->outputs;
    if (const auto* d = std::get_if<DepositPayload>(&payload)) return d->change;
    if (const auto* m = std::get_if<MediatedTransferPayload>(&payload)) return m->outputs;
    if (const auto* b = std::get_if<DisbursementPayload>(&payload)) return b->outputs;
    return kNoOutputs;
}

namespace {

void write_verdict(Writer& w, const Verdict& v) {
    w.u8(static_cast<std::uint8_t>(v.code)).u8(static_cast<std::uint8_t>(v.rule)).digest(v.token);
}

Verdict read_verdict(Reader& r) {
    Verdict v;
    auto code = r.u8();
    auto rule = r.u8();
    if (code > static_cast<std::uint8_t>(RejectCode::AlreadyClaimed) ||
        rule > static_cast<std::uint8_t>(PolicyRule::Fee)) {
        throw Error(Errc::Malformed, "verdict");
    }
    v.code = static_cast<RejectCode>(code);
    v.rule = static_cast<PolicyRule>(rule);
    v.token = r.digest<TokenIdTag>();
    return v;
}

}  // namespace

Hash256 chain_link(const Hash256& previous, std::uint64_t height, const Hash256& entry_hash,
                   const Verdict& outcome, const Hash256& state_hash) {
    Writer w;
    w.str("cbdc/chain/v1").digest(previous).u64(height).digest(entry_hash);
    write_verdict(w, outcome);
    w.digest(state_hash);
    return sha256(w.data());
}

void LogRecord::write(Writer& w) const {
    w.u64(height);
    entry.write(w);
    w.digest(entry_hash);
    write_verdict(w, outcome);
    w.digest(state_hash).digest(chain_hash);
}

LogRecord LogRecord::read(Reader& r) {
    LogRecord rec;
    rec.height = r.u64();
    rec.entry = LedgerEntry::read(r);
    rec.entry_hash = r.digest<HashTag>();
    rec.outcome = read_verdict(r);
    rec.state_hash = r.digest<HashTag>();
    rec.chain_hash = r.digest<HashTag>();
    return rec;
}

Bytes AuditBatch::encode() const {
    Writer w;
    w.str("cbdc/audit/v1").u64(from_height);
    w.u32(static_cast<std::uint32_t>(records.size()));
    for (const auto& rec : records) {
        rec.write(w);
    }
    w.u32(static_cast<std::uint32_t>(checkpoints.size()));
    for (const auto& cp : checkpoints) {
        w.u64(cp.height).digest(cp.chain_hash).digest(cp.state_hash);
    }
    return w.take();
}

AuditBatch AuditBatch::decode(ByteView data) {
    Reader r(data);
    if (r.str() != "cbdc/audit/v1") {
        throw Error(Errc::Malformed, "audit stream tag");
    }
    AuditBatch b;
    b.from_height = r.u64();
    auto n = r.count(100);
    b.records.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        b.records.push_back(LogRecord::read(r));
    }
    auto m = r.count(72);
    for (std::uint32_t i = 0; i < m; ++i) {
        AuditCheckpoint cp;
        cp.height = r.u64();
        cp.chain_hash = r.digest<HashTag>();
        cp.state_hash = r.digest<HashTag>();
        b.checkpoints.push_back(cp);
    }
    r.expect_done();
    return b;
}

LedgerState::LedgerState(std::shared_ptr<const Genesis> genesis, LedgerOptions options)
    : genesis_(std::move(genesis)), options_(options) {
    if (!genesis_) {
        throw Error(Errc::ConfigError, "ledger needs a genesis");
    }
    chain_head_ = genesis_->hash();
    for (const auto& v : genesis_->validators) {
        reserves_[v.id] = v.initial_reserve;
    }
    for (const auto& [id, key] : genesis_->issuers.keys()) {
        totals_[id] = KeyTotals{};
    }
}

Amount LedgerState::denomination(const KeyId& key) const {
    const auto* k = genesis_->issuers.find(key);
    return k == nullptr ? 0 : k->denomination;
}

std::optional<Amount> LedgerState::input_value(const LedgerEntry& entry) const {
    Amount total = 0;
    for (const auto& in : entry.inputs()) {
        const auto* k = genesis_->issuers.find(in.certificate.key_id);
        if (k == nullptr) return std::nullopt;
        total += k->denomination;
    }
    return total;
}

SpendContext LedgerState::spend_context(const LedgerEntry& entry) const {
    return SpendContext{entry.submitter, entry.nonce, input_value(entry).value_or(0), entry.timestamp};
}

Amount required_mediated_fee(const PolicyConfig& policy, const std::vector<std::uint32_t>& in_vintages,
                             const std::vector<std::uint32_t>& out_vintages) {
    bool converts = std::any_of(in_vintages.begin(), in_vintages.end(), [&](auto v) {
        return std::find(out_vintages.begin(), out_vintages.end(), v) == out_vintages.end();
    });
    return policy.mediated_fee + (converts ? policy.vintage_exchange_fee : 0);
}

Verdict LedgerState::validate_stateless(const LedgerEntry& entry) const {
    const auto& g = *genesis_;
    if (!submitter_may_write(g, entry)) {
        return Verdict::reject(RejectCode::UnauthorizedSubmitter);
    }
    const auto* key = submitter_key(g, entry.submitter);
    if (key == nullptr || !verify_signature(*key, entry.signing_bytes(), entry.signature)) {
        return Verdict::reject(RejectCode::BadSignature);
    }

    // Outputs: known key, in-range value, canonical width.
    Amount out_value = 0;
    std::vector<std::uint32_t> out_vintages;
    for (const auto& out : entry.outputs()) {
        const auto* k = g.issuers.find(out.key_id);
        if (k == nullptr) {
            return Verdict::reject(RejectCode::UnknownKeyId);
        }
        if (out.value < 0 || out.value >= k->n || out.width != k->modulus_bytes()) {
            return Verdict::reject(RejectCode::Malformed);
        }
        out_value += k->denomination;
        out_vintages.push_back(k->vintage);
    }

    // Inputs: known key, no duplicates within the entry, valid spend.
    Amount in_value = 0;
    std::vector<std::uint32_t> in_vintages;
    std::set<TokenId> seen;
    for (const auto& in : entry.inputs()) {
        const auto* k = g.issuers.find(in.certificate.key_id);
        if (k == nullptr) {
            return Verdict::reject(RejectCode::UnknownKeyId);
        }
        if (!seen.insert(in.token_id).second) {
            return Verdict::reject(RejectCode::DoubleSpend, PolicyRule::None, in.token_id);
        }
        in_value += k->denomination;
        in_vintages.push_back(k->vintage);
    }
    if (!entry.inputs().empty()) {
        const SpendContext ctx{entry.submitter, entry.nonce, in_value, entry.timestamp};
        for (const auto& in : entry.inputs()) {
            const auto& k = g.issuers.at(in.certificate.key_id);
            if (in.certificate.signature.width != k.modulus_bytes() || !verify_spend(in, ctx, k)) {
                return Verdict::reject(RejectCode::InvalidSpend, PolicyRule::None, in.token_id);
            }
        }
    }

    const auto& policy = g.policy;
    return std::visit(
        [&](const auto& p) -> Verdict {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, WithdrawalPayload>) {
                if (p.outputs.empty()) return Verdict::reject(RejectCode::Malformed);
                if (p.amount != out_value) return Verdict::reject(RejectCode::ValueMismatch);
            } else if constexpr (std::is_same_v<T, DepositPayload>) {
                if (p.inputs.empty()) return Verdict::reject(RejectCode::Malformed);
                if (in_value != p.credit + out_value) {
                    return Verdict::reject(RejectCode::ValueMismatch);
                }
            } else if constexpr (std::is_same_v<T, MediatedTransferPayload>) {
                if (p.inputs.empty() || p.outputs.empty()) {
                    return Verdict::reject(RejectCode::Malformed);
                }
                if (in_value != out_value + p.fee) {
                    return Verdict::reject(RejectCode::ValueMismatch);
                }
                if (p.fee < required_mediated_fee(policy, in_vintages, out_vintages)) {
                    return Verdict::reject(RejectCode::PolicyViolation, PolicyRule::Fee);
                }
                if (in_value >= policy.id_threshold && !p.id_flag) {
                    return Verdict::reject(RejectCode::PolicyViolation, PolicyRule::IdThreshold);
                }
            } else if constexpr (std::is_same_v<T, DisbursementPayload>) {
                if (p.outputs.empty()) return Verdict::reject(RejectCode::Malformed);
                if (p.amount != out_value) return Verdict::reject(RejectCode::ValueMismatch);
            } else {
                if (g.validator(p.msb) == nullptr || p.amount == 0) {
                    return Verdict::reject(RejectCode::Malformed);
                }
            }
            return Verdict::accept();
        },
        entry.payload);
}

bool LedgerState::nonce_used(NodeId submitter, std::uint64_t nonce) const {
    auto it = nonces_.find(submitter);
    return it != nonces_.end() && it->second.contains(nonce);
}

Amount LedgerState::withdrawn_in_day(NodeId msb, TimeMs at) const {
    auto it = velocity_.find(msb);
    if (it == velocity_.end()) return 0;
    return it->second.first == at / genesis_->policy.day_ms ? it->second.second : 0;
}

Amount LedgerState::reserve(NodeId msb) const {
    auto it = reserves_.find(msb);
    return it == reserves_.end() ? 0 : it->second;
}

KeyTotals LedgerState::totals(const KeyId& key) const {
    auto it = totals_.find(key);
    return it == totals_.end() ? KeyTotals{} : it->second;
}

Verdict LedgerState::validate_stateful(const LedgerEntry& entry) const {
    if (nonce_used(entry.submitter, entry.nonce)) {
        return Verdict::reject(RejectCode::DuplicateNonce);
    }
    for (const auto& in : entry.inputs()) {
        if (spent_.contains(in.token_id)) {
            return Verdict::reject(RejectCode::DoubleSpend, PolicyRule::None, in.token_id);
        }
    }
    const auto& policy = genesis_->policy;
    return std::visit(
        [&](const auto& p) -> Verdict {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, WithdrawalPayload>) {
                if (reserve(entry.submitter) < p.amount) {
                    return Verdict::reject(RejectCode::InsufficientReserve);
                }
                if (withdrawn_in_day(entry.submitter, entry.timestamp) + p.amount >
                    policy.msb_daily_withdrawal_cap) {
                    return Verdict::reject(RejectCode::PolicyViolation,
                                           PolicyRule::MsbWithdrawalVelocity);
                }
            } else if constexpr (std::is_same_v<T, DisbursementPayload>) {
                if (claims_.contains(p.claim_ref)) {
                    return Verdict::reject(RejectCode::AlreadyClaimed);
                }
                if (reserve(entry.submitter) < p.amount) {
                    return Verdict::reject(RejectCode::InsufficientReserve);
                }
            } else if constexpr (std::is_same_v<T, ReserveExchangePayload>) {
                if (p.direction == ReserveDirection::Drain && reserve(p.msb) < p.amount) {
                    return Verdict::reject(RejectCode::InsufficientReserve);
                }
            }
            return Verdict::accept();
        },
        entry.payload);
}

Verdict LedgerState::validate(const LedgerEntry& entry, bool stateless_checked) const {
    if (!stateless_checked) {
        auto v = validate_stateless(entry);
        if (!v.accepted()) return v;
    }
    return validate_stateful(entry);
}

Hash256 LedgerState::state_hash() const {
    Sha256 h;
    h.update("cbdc/state/v1");
    h.update_u64(spent_.size()).update(spent_acc_).update(nonce_acc_);
    h.update_u64(reserves_.size());
    for (const auto& [id, amount] : reserves_) {
        h.update_u64(id).update_u64(amount);
    }
    h.update_u64(totals_.size());
    for (const auto& [id, t] : totals_) {
        h.update(id).update_u64(t.issued).update_u64(t.redeemed);
    }
    for (const auto& [id, day] : velocity_) {
        h.update_u64(id).update_u64(day.first).update_u64(day.second);
    }
    h.update_u64(claims_.size()).update(claims_acc_);
    return h.finish();
}

const LogRecord& LedgerState::push_record(const LedgerEntry& entry, Hash256 entry_hash,
                                          Verdict outcome) {
    ++height_;
    if (outcome.accepted()) {
        ++accepted_;
    }
    LogRecord rec;
    rec.height = height_;
    rec.entry = entry;
    rec.entry_hash = entry_hash;
    rec.outcome = outcome;
    rec.state_hash = state_hash();
    rec.chain_hash = chain_link(chain_head_, height_, entry_hash, outcome, rec.state_hash);
    chain_head_ = rec.chain_hash;
    if (options_.checkpoint_interval > 0 && height_ % options_.checkpoint_interval == 0) {
        checkpoints_.push_back({height_, rec.chain_hash, rec.state_hash});
    }
    if (options_.retain_log) {
        log_.push_back(rec);
    }
    last_ = std::move(rec);
    return options_.retain_log ? log_.back() : last_;
}

const LogRecord& LedgerState::apply(const LedgerEntry& entry) {
    auto verdict = validate(entry);
    if (!verdict.accepted()) {
        throw Error(Errc::ValidationFailed, verdict.describe());
    }
    return apply_accepted(entry);
}

const LogRecord& LedgerState::apply_accepted(const LedgerEntry& entry) {
    auto entry_hash = entry.hash();

    nonces_[entry.submitter].insert(entry.nonce);
    {
        Writer w;
        w.u32(entry.submitter).u64(entry.nonce);
        nonce_acc_ = accumulate(nonce_acc_, w.data());
    }
    auto& reserve = reserves_[entry.submitter];
    for (const auto& in : entry.inputs()) {
        spent_.record_spent(in.token_id);
        spent_acc_ = accumulate(spent_acc_, in.token_id.view());
        auto d = denomination(in.certificate.key_id);
        totals_[in.certificate.key_id].redeemed += d;
        reserve += d;
    }
    for (const auto& out : entry.outputs()) {
        auto d = denomination(out.key_id);
        totals_[out.key_id].issued += d;
        reserve -= d;
    }
    if (const auto* w = std::get_if<WithdrawalPayload>(&entry.payload)) {
        auto day = entry.timestamp / genesis_->policy.day_ms;
        auto& v = velocity_[entry.submitter];
        if (v.first != day) {
            v = {day, 0};
        }
        v.second += w->amount;
    } else if (const auto* d = std::get_if<DisbursementPayload>(&entry.payload)) {
        claims_.insert(d->claim_ref);
        claims_acc_ = accumulate(claims_acc_, d->claim_ref.view());
    } else if (const auto* x = std::get_if<ReserveExchangePayload>(&entry.payload)) {
        auto& target = reserves_[x->msb];
        target = x->direction == ReserveDirection::Fund ? target + x->amount : target - x->amount;
    }
    return push_record(entry, entry_hash, Verdict::accept());
}

const LogRecord& LedgerState::execute(const LedgerEntry& entry, bool stateless_checked) {
    auto verdict = validate(entry, stateless_checked);
    if (verdict.accepted()) {
        return apply_accepted(entry);
    }
    return push_record(entry, entry.hash(), verdict);
}

AuditBatch LedgerState::audit_stream(std::uint64_t from_height) const {
    if (from_height > height_) {
        throw Error(Errc::HeightOutOfRange,
                    std::to_string(from_height) + " > " + std::to_string(height_));
    }
    if (!options_.retain_log && from_height < height_) {
        throw Error(Errc::HeightOutOfRange, "log not retained");
    }
    AuditBatch batch;
    batch.from_height = from_height;
    batch.records.assign(log_.begin() + static_cast<std::ptrdiff_t>(from_height), log_.end());
    for (const auto& cp : checkpoints_) {
        if (cp.height > from_height) {
            batch.checkpoints.push_back(cp);
        }
    }
    if (height_ > from_height && (batch.checkpoints.empty() || batch.checkpoints.back().height != height_)) {
        batch.checkpoints.push_back({height_, chain_head_, last_.state_hash});
    }
    return batch;
}

}  // namespace cbdc

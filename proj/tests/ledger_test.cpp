#include "cbdc/error.hpp"
#include "cbdc/ledger.hpp"
#include "support/world.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace cbdc;
using cbdc::testing::PendingOutput;
using cbdc::testing::World;

namespace {

World& shared_world() {
    static World w;
    return w;
}

std::vector<PendingOutput> prepare(World& w, std::initializer_list<Amount> ds) {
    std::vector<PendingOutput> out;
    for (auto d : ds) out.push_back(w.prepare(d));
    return out;
}

std::vector<Token> finish_all(const World& w, const std::vector<PendingOutput>& ps) {
    std::vector<Token> out;
    for (const auto& p : ps) out.push_back(w.finish(p));
    return out;
}

std::vector<Token> withdraw(World& w, LedgerState& s, NodeId msb, std::uint64_t nonce,
                            std::initializer_list<Amount> ds) {
    auto outs = prepare(w, ds);
    s.apply(w.withdrawal(msb, nonce, 100 + nonce, outs));
    return finish_all(w, outs);
}

bool contains_bytes(const Bytes& hay, ByteView needle) {
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

TEST(ValidateEntry, DepositOfSpentTokenIsDoubleSpend) {
    auto& w = shared_world();
    LedgerState s(w.genesis());
    auto tokens = withdraw(w, s, 0, 1, {4});
    s.apply(w.deposit(1, 1, 200, tokens, 4));
    auto v = s.validate(w.deposit(2, 1, 300, tokens, 4));
    EXPECT_EQ(v.code, RejectCode::DoubleSpend);
    EXPECT_EQ(v.token, tokens[0].id());
}

TEST(ValidateEntry, MediatedFourPlusOneToTwoPlusTwoIsValueMismatch) {
    auto& w = shared_world();
    LedgerState s(w.genesis());
    auto tokens = withdraw(w, s, 0, 1, {4, 1});
    auto entry = w.mediated(0, 2, 200, tokens, prepare(w, {2, 2}));
    EXPECT_EQ(s.validate(entry).code, RejectCode::ValueMismatch);
}

TEST(ValidateEntry, ValidWithdrawalAcceptsAndTokensVerifyEndToEnd) {
    auto& w = shared_world();
    LedgerState s(w.genesis());
    auto outs = prepare(w, {8, 2});
    auto entry = w.withdrawal(0, 1, 100, outs);
    ASSERT_TRUE(s.validate(entry).accepted());
    const auto& rec = s.apply(entry);
    EXPECT_EQ(rec.height, 1u);
    for (const auto& t : finish_all(w, outs)) {
        EXPECT_TRUE(verify_certificate(t.certificate, w.genesis()->issuers.at(t.certificate.key_id)));
    }
    // The freshly issued tokens are spendable at another MSB.
    auto tokens = finish_all(w, outs);
    EXPECT_TRUE(s.validate(w.deposit(3, 1, 200, tokens, 10)).accepted());
}

TEST(ValidateEntry, RejectReasons) {
    auto& w = shared_world();
    LedgerState s(w.genesis());
    auto tokens = withdraw(w, s, 0, 1, {4});

    auto bad_sig = w.withdrawal(0, 2, 100, prepare(w, {1}));
    bad_sig.timestamp += 1;
    EXPECT_EQ(s.validate(bad_sig).code, RejectCode::BadSignature);

    EXPECT_EQ(s.validate(w.withdrawal(0, 1, 100, prepare(w, {1}))).code, RejectCode::DuplicateNonce);
    // Nonces are per submitter.
    EXPECT_TRUE(s.validate(w.withdrawal(1, 1, 100, prepare(w, {1}))).accepted());

    auto unknown = w.withdrawal(0, 3, 100, prepare(w, {1}));
    auto& wp = std::get<WithdrawalPayload>(unknown.payload);
    wp.outputs[0].key_id = KeyId::from(sha256("nope"));
    unknown.sign(w.validator_key(0));
    EXPECT_EQ(s.validate(unknown).code, RejectCode::UnknownKeyId);

    auto amount_lie = w.withdrawal(0, 4, 100, prepare(w, {1}));
    std::get<WithdrawalPayload>(amount_lie.payload).amount = 2;
    amount_lie.sign(w.validator_key(0));
    EXPECT_EQ(s.validate(amount_lie).code, RejectCode::ValueMismatch);

    auto outsider = w.withdrawal(0, 5, 100, prepare(w, {1}));
    outsider.submitter = 9;
    EXPECT_EQ(s.validate(outsider).code, RejectCode::UnauthorizedSubmitter);

    // Reserve exchange is written by the central bank only.
    LedgerEntry rx;
    rx.submitter = 0;
    rx.payload = ReserveExchangePayload{0, 10, ReserveDirection::Fund};
    rx.sign(w.validator_key(0));
    EXPECT_EQ(s.validate(rx).code, RejectCode::UnauthorizedSubmitter);

    // Spend authorization bound to a different destination.
    auto redirected = w.deposit(1, 1, 200, tokens, 4);
    redirected.submitter = 2;
    redirected.sign(w.validator_key(2));
    auto v = s.validate(redirected);
    EXPECT_EQ(v.code, RejectCode::InvalidSpend);
    EXPECT_EQ(v.token, tokens[0].id());

    // Same token twice inside one entry.
    auto twice = w.deposit(1, 2, 200, {tokens[0], tokens[0]}, 8);
    EXPECT_EQ(s.validate(twice).code, RejectCode::DoubleSpend);

    // Deposit value balance: inputs = credit + change.
    EXPECT_EQ(s.validate(w.deposit(1, 3, 200, tokens, 3)).code, RejectCode::ValueMismatch);
    EXPECT_TRUE(s.validate(w.deposit(1, 3, 200, tokens, 3, prepare(w, {1}))).accepted());
}

TEST(ValidateEntry, PolicyRules) {
    PolicyConfig policy;
    policy.id_threshold = 16;
    policy.mediated_fee = 1;
    policy.msb_daily_withdrawal_cap = 20;
    World w(4, {1, 2, 4, 8, 16}, 1'000'000, policy, 3);
    LedgerState s(w.genesis());
    auto tokens = withdraw(w, s, 0, 1, {8, 4});
    auto big = withdraw(w, s, 0, 2, {8});  // 20 withdrawn today

    auto no_fee = w.mediated(0, 3, 200, tokens, prepare(w, {8, 4}), 0);
    EXPECT_EQ(s.validate(no_fee), Verdict::reject(RejectCode::PolicyViolation, PolicyRule::Fee));
    auto with_fee = w.mediated(0, 3, 200, tokens, prepare(w, {8, 2, 1}), 1);
    EXPECT_TRUE(s.validate(with_fee).accepted());

    std::vector<Token> twenty = tokens;
    twenty.push_back(big[0]);
    auto anon = w.mediated(0, 4, 200, twenty, prepare(w, {16, 2, 1}), 1, false);
    EXPECT_EQ(s.validate(anon), Verdict::reject(RejectCode::PolicyViolation, PolicyRule::IdThreshold));
    auto identified = w.mediated(0, 4, 200, twenty, prepare(w, {16, 2, 1}), 1, true);
    EXPECT_TRUE(s.validate(identified).accepted());

    auto over = w.withdrawal(0, 5, 300, prepare(w, {1}));
    EXPECT_EQ(s.validate(over),
              Verdict::reject(RejectCode::PolicyViolation, PolicyRule::MsbWithdrawalVelocity));
    // Another MSB has its own budget; the next day resets it.
    EXPECT_TRUE(s.validate(w.withdrawal(1, 5, 300, prepare(w, {1}))).accepted());
    EXPECT_TRUE(s.validate(w.withdrawal(0, 5, kDayMs + 1, prepare(w, {1}))).accepted());
}

TEST(ValidateEntry, ReserveAndClaims) {
    World w(4, {1, 2, 4, 8, 16}, 10, {}, 5);
    LedgerState s(w.genesis());
    EXPECT_EQ(s.validate(w.withdrawal(0, 1, 1, prepare(w, {16}))).code,
              RejectCode::InsufficientReserve);
    s.apply(w.reserve_exchange(1, 1, 0, 6, ReserveDirection::Fund));
    EXPECT_EQ(s.reserve(0), 16u);
    EXPECT_TRUE(s.validate(w.withdrawal(0, 1, 1, prepare(w, {16}))).accepted());
    EXPECT_EQ(s.validate(w.reserve_exchange(2, 1, 1, 11, ReserveDirection::Drain)).code,
              RejectCode::InsufficientReserve);

    auto claim = sha256("claim-1");
    s.apply(w.disbursement(1, 1, 1, claim, prepare(w, {8})));
    EXPECT_TRUE(s.claimed(claim));
    EXPECT_EQ(s.validate(w.disbursement(2, 1, 1, claim, prepare(w, {1}))).code,
              RejectCode::AlreadyClaimed);
}

TEST(ApplyEntry, EqualStatesStayEqual) {
    auto& w = shared_world();
    LedgerState a(w.genesis());
    LedgerState b(w.genesis());
    EXPECT_EQ(a.state_hash(), b.state_hash());
    auto entry = w.withdrawal(2, 1, 50, prepare(w, {16, 1}));
    a.apply(entry);
    b.apply(entry);
    EXPECT_EQ(a.state_hash(), b.state_hash());
    EXPECT_EQ(a.chain_head(), b.chain_head());
}

TEST(ApplyEntry, WithdrawalMovesReserveIntoIssued) {
    auto& w = shared_world();
    LedgerState s(w.genesis());
    auto before = s.reserve(1);
    auto key16 = w.issuer(16).key_id();
    auto key2 = w.issuer(2).key_id();
    s.apply(w.withdrawal(1, 1, 50, prepare(w, {16, 16, 2})));
    EXPECT_EQ(s.reserve(1), before - 34);
    EXPECT_EQ(s.totals(key16).issued, 32u);
    EXPECT_EQ(s.totals(key2).issued, 2u);
    EXPECT_EQ(s.reserve(0), before);
}

TEST(ApplyEntry, RejectedEntryThrowsAndLeavesStateAlone) {
    auto& w = shared_world();
    LedgerState s(w.genesis());
    auto tokens = withdraw(w, s, 0, 1, {1});
    auto hash = s.state_hash();
    auto bad = w.mediated(0, 2, 100, tokens, prepare(w, {2}));
    EXPECT_THROW(s.apply(bad), Error);
    EXPECT_EQ(s.state_hash(), hash);
    // execute() records the rejection instead.
    const auto& rec = s.execute(bad);
    EXPECT_EQ(rec.outcome.code, RejectCode::ValueMismatch);
    EXPECT_EQ(s.height(), 2u);
    EXPECT_EQ(s.rejected_count(), 1u);
    EXPECT_FALSE(s.spent().contains(tokens[0].id()));
}

TEST(Entry, EncodeDecodeRoundTrip) {
    auto& w = shared_world();
    LedgerState s(w.genesis());
    auto tokens = withdraw(w, s, 0, 1, {4, 1});
    std::vector<LedgerEntry> entries{
        w.withdrawal(0, 2, 5, prepare(w, {1, 2})),
        w.deposit(1, 1, 6, tokens, 3, prepare(w, {2})),
        w.mediated(2, 1, 7, tokens, prepare(w, {4}), 1, true),
        w.disbursement(3, 1, 8, sha256("c"), prepare(w, {8})),
        w.reserve_exchange(1, 9, 2, 77, ReserveDirection::Drain),
    };
    for (const auto& e : entries) {
        auto bytes = e.encode();
        auto back = LedgerEntry::decode(bytes);
        EXPECT_EQ(back.encode(), bytes);
        EXPECT_EQ(back.hash(), e.hash());
        EXPECT_EQ(back.type(), e.type());
        auto truncated = bytes;
        truncated.pop_back();
        EXPECT_THROW(LedgerEntry::decode(truncated), Error);
    }
}

namespace {

// Independent model of the ledger rules, kept deliberately naive: linear
// scans, plain maps, no accumulators.
struct Model {
    const Genesis& g;
    std::map<NodeId, Amount> reserve;
    std::map<KeyId, Amount> issued, redeemed;
    std::vector<TokenId> spent;
    std::map<NodeId, std::vector<std::uint64_t>> nonces;
    std::vector<Hash256> claims;
    std::map<NodeId, std::map<std::uint64_t, Amount>> per_day;

    explicit Model(const Genesis& genesis) : g(genesis) {
        for (const auto& v : g.validators) reserve[v.id] = v.initial_reserve;
    }

    Amount denom(const KeyId& k) const { return g.issuers.at(k).denomination; }

    RejectCode expect(const LedgerEntry& e) const {
        auto& ns = nonces.count(e.submitter) ? nonces.at(e.submitter) : empty_;
        if (std::find(ns.begin(), ns.end(), e.nonce) != ns.end()) return RejectCode::DuplicateNonce;
        for (const auto& in : e.inputs()) {
            if (std::find(spent.begin(), spent.end(), in.token_id) != spent.end()) {
                return RejectCode::DoubleSpend;
            }
        }
        if (auto* p = std::get_if<WithdrawalPayload>(&e.payload)) {
            if (reserve.at(e.submitter) < p->amount) return RejectCode::InsufficientReserve;
        }
        if (auto* p = std::get_if<DisbursementPayload>(&e.payload)) {
            if (std::find(claims.begin(), claims.end(), p->claim_ref) != claims.end()) {
                return RejectCode::AlreadyClaimed;
            }
            if (reserve.at(e.submitter) < p->amount) return RejectCode::InsufficientReserve;
        }
        if (auto* p = std::get_if<ReserveExchangePayload>(&e.payload)) {
            if (p->direction == ReserveDirection::Drain && reserve.at(p->msb) < p->amount) {
                return RejectCode::InsufficientReserve;
            }
        }
        return RejectCode::None;
    }

    void apply(const LedgerEntry& e) {
        nonces[e.submitter].push_back(e.nonce);
        for (const auto& in : e.inputs()) {
            spent.push_back(in.token_id);
            redeemed[in.certificate.key_id] += denom(in.certificate.key_id);
            reserve[e.submitter] += denom(in.certificate.key_id);
        }
        for (const auto& out : e.outputs()) {
            issued[out.key_id] += denom(out.key_id);
            reserve[e.submitter] -= denom(out.key_id);
        }
        if (auto* p = std::get_if<DisbursementPayload>(&e.payload)) claims.push_back(p->claim_ref);
        if (auto* p = std::get_if<ReserveExchangePayload>(&e.payload)) {
            if (p->direction == ReserveDirection::Fund) {
                reserve[p->msb] += p->amount;
            } else {
                reserve[p->msb] -= p->amount;
            }
        }
    }

    inline static const std::vector<std::uint64_t> empty_{};
};

struct Wallet {
    std::vector<Token> unspent;
    std::vector<Token> spent;
};

Amount value_of(const Genesis& g, const std::vector<Token>& ts) {
    Amount v = 0;
    for (const auto& t : ts) v += g.issuers.at(t.certificate.key_id).denomination;
    return v;
}

}  // namespace

TEST(LedgerReplay, RandomTenThousandEntriesMatchModelAndRefold) {
    World w(4, {1, 2, 4, 8, 16}, 5'000, {}, 21);
    const auto& g = *w.genesis();
    LedgerState s(w.genesis());
    Model model(g);
    Wallet wallet;
    auto& rng = w.rng();
    std::map<NodeId, std::uint64_t> next_nonce;
    std::uint64_t cb_nonce = 0;
    const auto& ds = g.denominations.values();

    auto pick_tokens = [&](std::size_t max) {
        std::vector<Token> chosen;
        auto n = std::min<std::size_t>(wallet.unspent.size(), 1 + rng.uniform(max));
        for (std::size_t i = 0; i < n; ++i) {
            auto idx = rng.uniform(wallet.unspent.size());
            chosen.push_back(wallet.unspent[idx]);
            wallet.unspent.erase(wallet.unspent.begin() + static_cast<std::ptrdiff_t>(idx));
        }
        return chosen;
    };
    auto split = [&](Amount v) {
        std::vector<PendingOutput> outs;
        for (auto d : g.denominations.greedy_split(v)) outs.push_back(w.prepare(d));
        return outs;
    };

    std::size_t checked_conservation = 0;
    for (int step = 0; step < 10'000; ++step) {
        NodeId msb = static_cast<NodeId>(rng.uniform(4));
        TimeMs ts = 1000 + static_cast<TimeMs>(step) * 10;
        auto nonce = ++next_nonce[msb];
        if (rng.chance(0.02) && nonce > 1) nonce = rng.between(1, nonce - 1);  // replayed nonce

        LedgerEntry e;
        std::vector<PendingOutput> pending;
        std::vector<Token> inputs;
        bool replaying_spent = false;
        auto roll = rng.uniform(100);
        if (roll < 35 || wallet.unspent.empty()) {
            for (auto k = 1 + rng.uniform(3); k > 0; --k) pending.push_back(w.prepare(ds[rng.uniform(ds.size())]));
            e = w.withdrawal(msb, nonce, ts, pending);
        } else if (roll < 65) {
            inputs = pick_tokens(3);
            auto total = value_of(g, inputs);
            auto credit = rng.between(1, total);
            if (credit < total) pending = split(total - credit);
            e = w.deposit(msb, nonce, ts, inputs, credit, pending);
        } else if (roll < 80) {
            inputs = pick_tokens(3);
            pending = split(value_of(g, inputs));
            e = w.mediated(msb, nonce, ts, inputs, pending);
        } else if (roll < 88 && !wallet.spent.empty()) {
            // Double spend of a token already consumed on the ledger.
            inputs = {wallet.spent[rng.uniform(wallet.spent.size())]};
            replaying_spent = true;
            e = w.deposit(msb, nonce, ts, inputs, value_of(g, inputs));
        } else if (roll < 94) {
            pending = split(1 + rng.uniform(20));
            auto claim = sha256("claim/" + std::to_string(rng.uniform(400)));
            e = w.disbursement(msb, nonce, ts, claim, pending);
        } else {
            auto dir = rng.chance(0.5) ? ReserveDirection::Fund : ReserveDirection::Drain;
            e = w.reserve_exchange(++cb_nonce, ts, msb, 1 + rng.uniform(3000), dir);
        }

        auto expected = model.expect(e);
        const auto& rec = s.execute(e);
        ASSERT_EQ(rec.outcome.code, expected) << "step " << step << " " << rec.outcome.describe();
        if (rec.outcome.accepted()) {
            model.apply(e);
            for (auto& t : inputs) {
                if (std::find_if(wallet.spent.begin(), wallet.spent.end(),
                                 [&](const Token& x) { return x.id() == t.id(); }) == wallet.spent.end()) {
                    wallet.spent.push_back(t);
                }
            }
            for (const auto& p : pending) wallet.unspent.push_back(w.finish(p));
        } else if (!replaying_spent) {
            // Inputs of an entry rejected for other reasons stay spendable.
            for (auto& t : inputs) wallet.unspent.push_back(t);
        }

        if (step % 97 == 0) {
            // Conservation: outstanding per key equals the value of certified,
            // unspent tokens.
            std::map<KeyId, Amount> held;
            for (const auto& t : wallet.unspent) held[t.certificate.key_id] += g.issuers.at(t.certificate.key_id).denomination;
            for (const auto& [k, totals] : s.totals()) {
                ASSERT_EQ(totals.outstanding(), held[k]) << "step " << step;
            }
            ++checked_conservation;
        }
    }
    EXPECT_GT(checked_conservation, 100u);
    EXPECT_GT(s.rejected_count(), 100u);
    EXPECT_GT(s.accepted_count(), 5000u);

    for (const auto& [id, r] : model.reserve) EXPECT_EQ(s.reserve(id), r);
    for (const auto& [k, t] : s.totals()) {
        EXPECT_EQ(t.issued, model.issued[k]);
        EXPECT_EQ(t.redeemed, model.redeemed[k]);
    }
    EXPECT_EQ(s.spent().size(), model.spent.size());

    // Fold the committed log from genesis into a fresh replica.
    LedgerState refold(w.genesis());
    for (const auto& rec : s.log()) {
        const auto& again = refold.execute(rec.entry);
        ASSERT_EQ(again.outcome, rec.outcome);
        ASSERT_EQ(again.chain_hash, rec.chain_hash);
    }
    EXPECT_EQ(refold.state_hash(), s.state_hash());
}

TEST(AuditStream, HeightsAndReplay) {
    auto& w = shared_world();
    LedgerState s(w.genesis(), {true, 2});
    auto tokens = withdraw(w, s, 0, 1, {4, 2});
    s.apply(w.deposit(1, 1, 200, {tokens[0]}, 4));
    s.execute(w.deposit(2, 1, 300, {tokens[0]}, 4));  // rejected, still logged
    s.apply(w.mediated(3, 1, 400, {tokens[1]}, prepare(w, {1, 1})));

    auto full = s.audit_stream(0);
    ASSERT_EQ(full.records.size(), 4u);
    EXPECT_EQ(full.records[2].outcome.code, RejectCode::DoubleSpend);
    EXPECT_EQ(full.records[1].entry.submitter, 1u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(full.records[i].entry.encode(), s.log()[i].entry.encode());
    }
    EXPECT_TRUE(s.audit_stream(s.height()).records.empty());
    EXPECT_THROW(s.audit_stream(s.height() + 1), Error);
    EXPECT_EQ(s.audit_stream(3).records.size(), 1u);

    auto decoded = AuditBatch::decode(full.encode());
    LedgerState fresh(w.genesis());
    for (const auto& rec : decoded.records) fresh.execute(rec.entry);
    EXPECT_EQ(fresh.state_hash(), s.state_hash());
    ASSERT_FALSE(decoded.checkpoints.empty());
    EXPECT_EQ(decoded.checkpoints.back().state_hash, s.state_hash());
    EXPECT_EQ(decoded.checkpoints.back().height, 4u);
}

TEST(HashChain, TamperingChangesEverySubsequentLink) {
    auto& w = shared_world();
    LedgerState s(w.genesis());
    for (std::uint64_t n = 1; n <= 20; ++n) withdraw(w, s, n % 4, n, {1});
    auto log = s.log();
    const auto genesis_hash = w.genesis()->hash();
    auto relink = [&](std::vector<LogRecord>& recs) {
        Hash256 prev = genesis_hash;
        for (auto& r : recs) {
            r.entry_hash = r.entry.hash();
            r.chain_hash = chain_link(prev, r.height, r.entry_hash, r.outcome, r.state_hash);
            prev = r.chain_hash;
        }
    };
    auto honest = log;
    relink(honest);
    for (std::size_t i = 0; i < honest.size(); ++i) ASSERT_EQ(honest[i].chain_hash, log[i].chain_hash);

    for (std::size_t k : {0u, 7u, 19u}) {
        auto tampered = log;
        tampered[k].entry.timestamp += 1;
        relink(tampered);
        for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(tampered[i].chain_hash, log[i].chain_hash);
        for (std::size_t i = k; i < log.size(); ++i) EXPECT_NE(tampered[i].chain_hash, log[i].chain_hash);
    }
}

TEST(EntryPrivacy, NoAccountIdsOrBlindingFactorsInSerializedEntries) {
    auto& w = shared_world();
    LedgerState s(w.genesis());
    std::vector<std::string> accounts{"alice", "bob", "treasury"};
    auto outs = prepare(w, {4, 2});
    s.apply(w.withdrawal(0, 1, 1, outs, "alice"));
    auto tokens = finish_all(w, outs);
    auto change = prepare(w, {2});
    s.apply(w.deposit(1, 1, 2, tokens, 4, change, "bob"));
    s.apply(w.disbursement(2, 1, 3, sha256("c"), prepare(w, {1})));

    for (const auto& rec : s.log()) {
        Writer wr;
        rec.write(wr);
        const auto& bytes = wr.data();
        for (const auto& a : accounts) EXPECT_FALSE(contains_bytes(bytes, as_bytes(a))) << a;
        for (const auto& p : outs) {
            auto r = bigint_to_bytes(p.factor.r, w.issuer(4).pub().modulus_bytes());
            EXPECT_FALSE(contains_bytes(bytes, r));
        }
    }
}

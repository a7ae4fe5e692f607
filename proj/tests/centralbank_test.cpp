#include "cbdc/centralbank.hpp"
#include "cbdc/error.hpp"
#include "support/deployed.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

using namespace cbdc;
using cbdc::testing::Deployed;
using cbdc::testing::small_topology;

namespace {

Errc error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::AssertionFailed;
}

CentralBank fresh_bank() { return CentralBank("central-bank", SigningKey::from_seed(sha256("cb-test"))); }

struct Blinded {
    std::vector<BlindedMessage> messages;
    std::vector<KeyId> keys;
    std::vector<BlindingFactor> factors;
    std::vector<TokenId> ids;
};

Blinded blind_for(const CentralBank& bank, const Genesis& g, const std::vector<Amount>& denoms, Rng& rng) {
    Blinded b;
    for (auto d : denoms) {
        const auto& pub = *g.issuers.find(d, g.vintage);
        auto [keys, id] = new_pretoken(d, g.vintage, g.denominations, rng);
        auto [m, f] = blind(id.view(), bank.issuer_key(pub.key_id).pub(), rng);
        b.messages.push_back(m);
        b.keys.push_back(pub.key_id);
        b.factors.push_back(f);
        b.ids.push_back(id);
    }
    return b;
}

}  // namespace

TEST(Provision, OneKeyPerDenomination) {
    auto bank = fresh_bank();
    auto rec = bank.provision_vintage(2025, DenominationSet({1, 2, 4}), 512, 9);
    ASSERT_EQ(rec.keys.size(), 3u);
    EXPECT_EQ(rec.keys[0].denomination, 1u);
    EXPECT_EQ(rec.keys[2].denomination, 4u);
    EXPECT_NE(rec.keys[0].key_id, rec.keys[1].key_id);
    EXPECT_EQ(bank.registry().size(), 3u);
    EXPECT_EQ(error_of([&] { bank.provision_vintage(2025, DenominationSet({1}), 512, 9); }), Errc::VintageExists);
    bank.provision_vintage(2026, DenominationSet({1, 2, 4}), 512, 9);
    EXPECT_EQ(bank.registry().size(), 6u);
}

TEST(Provision, KeysRegenerateFromSeed) {
    auto bank = fresh_bank();
    DenominationSet denoms({1, 2, 4, 8});
    auto rec = bank.provision_vintage(7, denoms, 512, 42);
    for (const auto& pub : rec.keys) {
        auto again = keygen(pub.denomination, 7, 512, 42, denoms);
        EXPECT_EQ(again.pub().n, pub.n);
        EXPECT_EQ(again.key_id(), pub.key_id);
        EXPECT_EQ(compute_key_id(pub.n, pub.e, pub.denomination, 7), pub.key_id);
    }
}

TEST(Issue, ReserveBoundsIssuance) {
    auto t = small_topology();
    t.initial_reserve = 10;
    Deployed net(t);
    Rng rng(1);
    auto& bank = net.bank();

    auto over = blind_for(bank, *net.genesis(), {8, 4}, rng);
    EXPECT_EQ(error_of([&] { bank.sign_withdrawal(0, over.messages, over.keys); }), Errc::InsufficientReserve);
    EXPECT_EQ(bank.reserve(0), 10u);

    auto ok = blind_for(bank, *net.genesis(), {8, 2}, rng);
    auto sigs = bank.sign_withdrawal(0, ok.messages, ok.keys);
    EXPECT_EQ(bank.reserve(0), 0u);
    EXPECT_EQ(bank.totals(ok.keys[0]).issued, 8u);
    EXPECT_EQ(bank.totals(ok.keys[1]).issued, 2u);
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        const auto& pub = bank.issuer_key(ok.keys[i]).pub();
        auto s = unblind(sigs[i], ok.factors[i], pub);
        EXPECT_TRUE(verify(ok.ids[i].view(), s, pub));
        EXPECT_TRUE(verify_certificate(Certificate{ok.ids[i], pub.key_id, s}, pub));
    }
    // Other MSBs are untouched.
    EXPECT_EQ(bank.reserve(1), 10u);
}

TEST(Redeem, OnlyCommittedInputsAndOnce) {
    Deployed net(small_topology({{"alice", 0, KycTier::Basic, 100}, {"shop", 1}}));
    Wallet w(net.genesis(), Rng(2));
    auto plan = w.plan_withdrawal(4);
    const auto& wrec = net.commit(net.msb(0).request_withdrawal("alice", plan.request, 1));
    w.finalize_withdrawal(plan.session, net.signatures(wrec), 1);
    const auto& token = w.tokens()[0];
    const KeyId key = token.token.certificate.key_id;

    EXPECT_EQ(error_of([&] { net.bank().redeem(1, {token.token.id()}, {key}); }), Errc::NotCommitted);

    auto reserve_before = net.bank().reserve(1);
    auto q = net.msb(1).quote(5);
    auto b = w.make_payment(4, q, 5);
    net.commit(net.msb(1).receive_deposit(q, {b.inputs, {}}, "shop"));
    EXPECT_EQ(net.bank().totals(key).redeemed, 4u);
    EXPECT_EQ(net.bank().reserve(1), reserve_before + 4);
    EXPECT_EQ(net.bank().reserve(1), net.ledger.reserve(1));
    EXPECT_EQ(error_of([&] { net.bank().redeem(1, {b.inputs[0].token_id}, {key}); }), Errc::AlreadyRedeemed);
}

TEST(Bank, OnCommitIsIdempotent) {
    Deployed net(small_topology({{"alice", 0, KycTier::Basic, 100}}));
    Wallet w(net.genesis(), Rng(3));
    auto plan = w.plan_withdrawal(13);
    const auto& rec = net.commit(net.msb(0).request_withdrawal("alice", plan.request, 1));
    auto reserve = net.bank().reserve(0);
    auto totals = net.bank().totals();
    net.bank().on_commit(rec);
    net.bank().on_commit(rec);
    EXPECT_EQ(net.bank().reserve(0), reserve);
    EXPECT_EQ(net.bank().totals(), totals);
    EXPECT_EQ(net.signatures(rec).size(), 3u);
}

TEST(Bank, RejectedEntriesIssueNothing) {
    PolicyConfig p;
    p.msb_daily_withdrawal_cap = 5;
    Deployed net(small_topology({{"alice", 0, KycTier::Basic, 100}}, p));
    Wallet w(net.genesis(), Rng(4));
    auto plan = w.plan_withdrawal(13);
    const auto& rec = net.commit(net.msb(0).request_withdrawal("alice", plan.request, 1));
    EXPECT_FALSE(rec.outcome.accepted());
    EXPECT_EQ(net.bank().signatures_for(rec.entry_hash), nullptr);
    for (const auto& [id, t] : net.bank().totals()) {
        EXPECT_EQ(t.issued, 0u);
    }
}

TEST(Bank, ReserveExchangeMovesReserve) {
    Deployed net(small_topology());
    auto start = net.bank().reserve(2);
    const auto& fund = net.commit(net.bank().reserve_exchange(2, 500, ReserveDirection::Fund, 1));
    ASSERT_TRUE(fund.outcome.accepted());
    EXPECT_EQ(net.bank().reserve(2), start + 500);
    const auto& drain = net.commit(net.bank().reserve_exchange(2, start + 501, ReserveDirection::Drain, 2));
    EXPECT_EQ(drain.outcome.code, RejectCode::InsufficientReserve);
    EXPECT_EQ(net.bank().reserve(2), start + 500);
    EXPECT_EQ(net.msb(2).reserve(), start + 500);
}

// Random withdrawals and deposits: the bank's mirror must equal the ledger's
// totals and reserves after every commit.
TEST(Bank, MirrorTracksLedgerUnderRandomTraffic) {
    PolicyConfig p;
    p.account_daily_withdrawal_cap = 1'000'000;
    p.account_daily_deposit_cap = 1'000'000;
    Deployed net(small_topology(
        {{"a0", 0, KycTier::Basic, 100'000}, {"a1", 1, KycTier::Basic, 100'000}, {"a2", 2}, {"a3", 3}}, p));
    Wallet w(net.genesis(), Rng(5));
    Rng rng(6);
    const std::vector<std::string> payers{"a0", "a1"};
    const std::vector<std::string> shops{"a2", "a3"};
    for (int i = 0; i < 300; ++i) {
        if (w.balance() < 50 || rng.chance(0.4)) {
            auto m = static_cast<NodeId>(rng.uniform(2));
            auto plan = w.plan_withdrawal(rng.between(1, 700));
            const auto& rec = net.commit(net.msb(m).request_withdrawal(payers[m], plan.request, i));
            if (rec.outcome.accepted()) {
                w.finalize_withdrawal(plan.session, net.signatures(rec), i);
            } else {
                w.abandon(plan.session);
            }
        } else {
            auto m = static_cast<NodeId>(2 + rng.uniform(2));
            auto q = net.msb(m).quote(i);
            auto b = w.make_payment(rng.between(1, w.balance()), q, i);
            const auto& rec = net.commit(net.msb(m).receive_deposit(q, {b.inputs, b.change}, shops[m - 2]));
            ASSERT_TRUE(rec.outcome.accepted()) << rec.outcome.describe();
            if (b.change_session != 0) w.finalize_withdrawal(b.change_session, net.signatures(rec), i);
            w.settle_payment(b, true, true);
        }
        ASSERT_EQ(net.bank().reserves(), net.ledger.reserves());
        for (const auto& [id, t] : net.ledger.totals()) {
            ASSERT_EQ(net.bank().totals(id), t);
        }
        Amount outstanding = 0;
        for (const auto& [id, t] : net.bank().totals()) outstanding += t.outstanding();
        ASSERT_EQ(outstanding, w.balance());
    }
}

TEST(Epoch, JsonRoundTrip) {
    auto bank = fresh_bank();
    auto rec = bank.provision_vintage(3, DenominationSet({1, 2, 4}), 512, 11);
    auto j = rec.to_json();
    auto back = EpochRecord::from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.issuer_label, "central-bank");
    EXPECT_EQ(back.vintage, 3u);
    EXPECT_EQ(back.denominations, rec.denominations);
    ASSERT_EQ(back.keys.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.keys[i].key_id, rec.keys[i].key_id);
        EXPECT_EQ(back.keys[i].n, rec.keys[i].n);
    }
    auto k = issuer_key_to_json(rec.keys[0]);
    k["denomination"] = 2;
    EXPECT_EQ(error_of([&] { issuer_key_from_json(k); }), Errc::KeyMismatch);
}

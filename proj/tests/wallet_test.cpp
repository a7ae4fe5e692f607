#include "cbdc/error.hpp"
#include "cbdc/wallet.hpp"
#include "support/deployed.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

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

std::multiset<Amount> held(const Wallet& w) {
    std::multiset<Amount> out;
    for (const auto& t : w.tokens()) out.insert(t.denomination);
    return out;
}

class WalletTest : public ::testing::Test {
protected:
    WalletTest() : net(small_topology({{"alice", 0, KycTier::Basic, 10'000}, {"shop", 1}})) {}

    void withdraw(Wallet& w, Amount amount, TimeMs now = 1) {
        auto plan = w.plan_withdrawal(amount);
        const auto& rec = net.commit(net.msb(0).request_withdrawal("alice", plan.request, now));
        ASSERT_TRUE(rec.outcome.accepted());
        EXPECT_EQ(w.finalize_withdrawal(plan.session, net.signatures(rec), now), amount);
    }

    Deployed net;
};

}  // namespace

TEST_F(WalletTest, ThirteenSplitsEightFourOne) {
    Wallet w(net.genesis(), Rng(1));
    auto plan = w.plan_withdrawal(13);
    EXPECT_EQ(plan.denominations, (std::vector<Amount>{8, 4, 1}));
    EXPECT_EQ(plan.request.outputs.size(), 3u);
    EXPECT_EQ(w.pending_sessions(), 1u);
    EXPECT_EQ(w.pending_factors().size(), 3u);
}

TEST_F(WalletTest, UnrepresentableAmounts) {
    Wallet w(net.genesis(), Rng(1));
    EXPECT_EQ(error_of([&] { w.plan_withdrawal(0); }), Errc::UnrepresentableAmount);
    Deployed odd(small_topology({}, {}, {5, 10}));
    Wallet v(odd.genesis(), Rng(1));
    EXPECT_EQ(error_of([&] { v.plan_withdrawal(7); }), Errc::UnrepresentableAmount);
    EXPECT_EQ(v.plan_withdrawal(25).denominations, (std::vector<Amount>{10, 10, 5}));
}

TEST_F(WalletTest, BlindedOutputsAreDistinct) {
    Wallet w(net.genesis(), Rng(2));
    std::set<std::string> blinded;
    for (int i = 0; i < 2500; ++i) {
        auto plan = w.plan_withdrawal(15);  // 8+4+2+1
        for (const auto& b : plan.request.outputs) blinded.insert(b.value.get_str(16));
        w.abandon(plan.session);
    }
    EXPECT_EQ(blinded.size(), 10'000u);
}

TEST_F(WalletTest, FinalizeStoresVerifiedTokensAndErasesFactors) {
    Wallet w(net.genesis(), Rng(3));
    withdraw(w, 13);
    EXPECT_EQ(w.balance(), 13u);
    EXPECT_EQ(held(w), (std::multiset<Amount>{1, 4, 8}));
    EXPECT_EQ(w.pending_sessions(), 0u);
    EXPECT_TRUE(w.pending_factors().empty());
    for (const auto& t : w.tokens()) {
        const auto& pub = net.genesis()->issuers.at(t.token.certificate.key_id);
        EXPECT_TRUE(verify_certificate(t.token.certificate, pub));
        EXPECT_EQ(token_id_of(t.token.keys.verification()), t.token.id());
    }
}

TEST_F(WalletTest, TamperedSignatureStoresNothing) {
    Wallet w(net.genesis(), Rng(4));
    auto plan = w.plan_withdrawal(13);
    const auto& rec = net.commit(net.msb(0).request_withdrawal("alice", plan.request, 1));
    auto sigs = net.signatures(rec);
    sigs[1].value += 1;
    EXPECT_EQ(error_of([&] { w.finalize_withdrawal(plan.session, sigs, 1); }), Errc::BadSignature);
    EXPECT_EQ(w.balance(), 0u);
    EXPECT_EQ(error_of([&] { w.finalize_withdrawal(999, sigs, 1); }), Errc::NoPendingSession);
    // The session survives, so the genuine signatures still work.
    EXPECT_EQ(w.finalize_withdrawal(plan.session, net.signatures(rec), 1), 13u);
}

TEST_F(WalletTest, ExactSubsetIsPreferred) {
    Wallet w(net.genesis(), Rng(5));
    withdraw(w, 13);
    auto q = net.msb(1).quote(10);
    auto b = w.make_payment(5, q, 10);
    std::multiset<Amount> spent;
    for (const auto& in : b.inputs) {
        spent.insert(net.genesis()->issuers.at(in.certificate.key_id).denomination);
    }
    EXPECT_EQ(spent, (std::multiset<Amount>{4, 1}));
    EXPECT_TRUE(b.change.empty());
    EXPECT_EQ(b.change_session, 0u);
    EXPECT_EQ(w.balance(), 8u);
    EXPECT_EQ(w.in_flight().size(), 2u);
    // Each input is authorized for this quote.
    for (const auto& in : b.inputs) {
        const auto& pub = net.genesis()->issuers.at(in.certificate.key_id);
        EXPECT_TRUE(verify_spend(in, q.context(b.input_total), pub));
    }
}

TEST_F(WalletTest, OvershootReturnsChange) {
    Wallet w(net.genesis(), Rng(6));
    withdraw(w, 8);
    auto q = net.msb(1).quote(10);
    auto b = w.make_payment(5, q, 10);
    EXPECT_EQ(b.input_total, 8u);
    EXPECT_EQ(b.change_value, 3u);
    EXPECT_EQ(b.change.size(), 2u);  // 2 + 1
    const auto& rec = net.commit(net.msb(1).receive_deposit(q, {b.inputs, b.change}, "shop"));
    ASSERT_TRUE(rec.outcome.accepted()) << rec.outcome.describe();
    EXPECT_EQ(net.msb(1).account("shop").balance, 5u);
    w.finalize_withdrawal(b.change_session, net.signatures(rec), 10);
    w.settle_payment(b, true, true);
    EXPECT_EQ(held(w), (std::multiset<Amount>{1, 2}));
}

TEST_F(WalletTest, RejectedPaymentReturnsTokens) {
    Wallet w(net.genesis(), Rng(7));
    withdraw(w, 12);
    auto q = net.msb(1).quote(10);
    auto b = w.make_payment(12, q, 10);
    EXPECT_EQ(w.balance(), 0u);
    w.settle_payment(b, false, false);
    EXPECT_EQ(w.balance(), 12u);
    EXPECT_TRUE(w.in_flight().empty());
    EXPECT_EQ(error_of([&] { w.make_payment(13, q, 10); }), Errc::InsufficientBalance);
}

TEST_F(WalletTest, YoungTokensRaiseRiskFlag) {
    Wallet w(net.genesis(), Rng(8), 1'000);
    withdraw(w, 4, 100);
    auto b = w.make_payment(4, net.msb(1).quote(600), 600);
    EXPECT_TRUE(b.risk_flag);
    ASSERT_EQ(w.risk_log().size(), 1u);
    EXPECT_EQ(w.risk_log()[0].youngest_age, 500u);
    w.settle_payment(b, false, false);
    auto later = w.make_payment(4, net.msb(1).quote(1'100), 1'100);
    EXPECT_FALSE(later.risk_flag);
    EXPECT_EQ(w.risk_log().size(), 1u);
}

TEST_F(WalletTest, SaveLoadRoundTripsAndNeedsTheKey) {
    Wallet w(net.genesis(), Rng(9));
    withdraw(w, 13);
    auto path = std::filesystem::temp_directory_path() / "cbdc_wallet_test.bin";
    auto key = sha256("wallet key");
    w.save(path, key);

    auto back = Wallet::load(path, key, net.genesis(), Rng(10));
    EXPECT_EQ(back.balance(), 13u);
    ASSERT_EQ(back.tokens().size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.tokens()[i].token.id(), w.tokens()[i].token.id());
    }
    // Loaded tokens still spend.
    auto q = net.msb(1).quote(20);
    auto b = back.make_payment(13, q, 20);
    EXPECT_TRUE(net.commit(net.msb(1).receive_deposit(q, {b.inputs, {}}, "shop")).outcome.accepted());

    EXPECT_THROW(Wallet::load(path, sha256("wrong"), net.genesis(), Rng(10)), Error);
    std::filesystem::remove(path);
}

TEST_F(WalletTest, RespendReauthorizesSameTokens) {
    Wallet w(net.genesis(), Rng(11));
    withdraw(w, 6);
    auto q1 = net.msb(1).quote(10);
    auto b = w.make_payment(6, q1, 10);
    auto q2 = net.msb(2).quote(10);
    auto again = w.respend(b, q2);
    ASSERT_EQ(again.inputs.size(), b.inputs.size());
    for (std::size_t i = 0; i < b.inputs.size(); ++i) {
        EXPECT_EQ(again.inputs[i].token_id, b.inputs[i].token_id);
        const auto& pub = net.genesis()->issuers.at(again.inputs[i].certificate.key_id);
        EXPECT_TRUE(verify_spend(again.inputs[i], q2.context(6), pub));
        EXPECT_FALSE(verify_spend(again.inputs[i], q1.context(6), pub));
    }
}

// Random payment amounts: change plus paid always equals the inputs, and the
// wallet never loses value it was not paid for.
TEST_F(WalletTest, PaymentArithmeticProperty) {
    Wallet w(net.genesis(), Rng(12));
    withdraw(w, 1000);
    Rng rng(13);
    Amount paid = 0;
    for (int i = 0; i < 60 && w.balance() > 0; ++i) {
        auto amount = rng.between(1, std::min<Amount>(w.balance(), 90));
        auto before = w.balance();
        auto q = net.msb(1).quote(100 + i);
        auto b = w.make_payment(amount, q, 100 + i);
        ASSERT_EQ(b.input_total, amount + b.change_value);
        const auto& rec = net.commit(net.msb(1).receive_deposit(q, {b.inputs, b.change}, "shop"));
        ASSERT_TRUE(rec.outcome.accepted()) << rec.outcome.describe();
        if (b.change_session != 0) w.finalize_withdrawal(b.change_session, net.signatures(rec), 100 + i);
        w.settle_payment(b, true, true);
        paid += amount;
        ASSERT_EQ(w.balance(), before - amount);
    }
    EXPECT_EQ(net.msb(1).account("shop").balance, paid);
}

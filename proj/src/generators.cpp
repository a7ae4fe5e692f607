// Synthetic scenarios for property runs.

#include "cbdc/harness.hpp"

namespace cbdc {

Scenario make_fuzz_scenario(std::uint64_t seed, std::size_t actions) {
    Rng rng(Sha256().update("cbdc/fuzz/v1").update_u64(seed).finish());
    Scenario s;
    s.name = "fuzz-" + std::to_string(seed);
    s.seed = seed;
    auto& t = s.topology;
    t.validators = 5;
    t.denominations = DenominationSet::powers_of_two(9).values();
    // Short days so that per-account caps roll over during the run.
    t.policy.day_ms = 20'000;
    t.policy.mediated_fee = 1;
    t.policy.id_threshold = 400;
    t.initial_reserve = 200'000;

    const std::size_t n_wallets = 8;
    for (std::size_t i = 0; i < n_wallets; ++i) {
        t.wallets.push_back({"w" + std::to_string(i), rng.chance(0.5) ? 0 : rng.between(100, 2000)});
    }
    std::vector<std::string> accounts;
    for (std::size_t i = 0; i < 12; ++i) {
        auto id = "acct-" + std::to_string(i);
        auto tier = rng.chance(0.3) ? KycTier::Verified : KycTier::Basic;
        bool registered = rng.chance(0.9);
        t.accounts.push_back({id, static_cast<NodeId>(i % t.validators), tier, rng.between(1'000, 50'000), registered});
        accounts.push_back(id);
    }
    for (std::size_t m = 0; m < t.validators; ++m) {
        t.accounts.push_back({"treasury-" + std::to_string(m), static_cast<NodeId>(m), KycTier::Verified, 20'000, true});
    }
    s.cluster.sim.seed = seed;
    s.cluster.sim.latency_min = 2;
    s.cluster.sim.latency_max = 30;

    auto wallet = [&] { return t.wallets[rng.uniform(n_wallets)].name; };
    auto account = [&] { return accounts[rng.uniform(accounts.size())]; };
    TimeMs at = 100;
    for (std::size_t i = 0; i < actions; ++i) {
        at += rng.between(1, 40);
        Action a;
        a.at = at;
        auto roll = rng.uniform(100);
        if (roll < 35) {
            a.kind = ActionKind::Withdraw;
            a.wallet = wallet();
            a.account = account();
            a.amount = rng.between(1, 400);
        } else if (roll < 65) {
            a.kind = ActionKind::Deposit;
            a.wallet = wallet();
            a.account = account();
            a.amount = rng.between(1, 300);
        } else if (roll < 80) {
            a.kind = ActionKind::Mediate;
            a.wallet = wallet();
            a.payee = wallet();
            a.msb = static_cast<NodeId>(rng.uniform(t.validators));
            a.amount = rng.between(1, 500);
            a.id_info = rng.chance(0.7);
        } else if (roll < 87) {
            a.kind = ActionKind::DoubleSpend;
            a.wallet = wallet();
            a.accounts = {account(), account()};
            a.gap_ms = rng.chance(0.5) ? 0 : rng.between(1, 3000);
            a.amount = rng.between(1, 200);
        } else if (roll < 94) {
            a.kind = ActionKind::Disburse;
            a.wallet = wallet();
            a.msb = static_cast<NodeId>(rng.uniform(t.validators));
            a.treasury = "treasury-" + std::to_string(a.msb);
            // Some claims repeat, some claimants are not verified.
            a.claim = "claim-" + std::to_string(rng.uniform(actions / 4 + 1));
            a.verified = rng.chance(0.9);
            a.amount = rng.between(1, 100);
        } else {
            a.kind = ActionKind::ReserveExchange;
            a.msb = static_cast<NodeId>(rng.uniform(t.validators));
            a.direction = rng.chance(0.7) ? ReserveDirection::Fund : ReserveDirection::Drain;
            a.amount = rng.between(1, 20'000);
        }
        s.actions.push_back(std::move(a));
    }
    return s;
}

Scenario make_double_spend_scenario(std::uint64_t seed, std::size_t deposits, double duplicate_fraction) {
    Rng rng(Sha256().update("cbdc/double-spend/v1").update_u64(seed).finish());
    Scenario s;
    s.name = "double-spend-" + std::to_string(seed);
    s.seed = seed;
    auto& t = s.topology;
    t.validators = 5;
    t.denominations = DenominationSet::powers_of_two(9).values();  // 1..512
    t.policy.account_daily_withdrawal_cap = 1'000'000'000;
    t.policy.msb_daily_withdrawal_cap = 1'000'000'000;
    t.initial_reserve = 100'000'000;
    s.cluster.sim.seed = seed;
    s.cluster.sim.latency_min = 2;
    s.cluster.sim.latency_max = 20;

    // Every payer withdraws 1023 (one token of each denomination) at a time,
    // and every deposit spends exactly one token.
    const std::size_t per_withdrawal = t.denominations.size();
    const std::size_t n_payers = 20;
    const std::size_t withdrawals = (deposits + per_withdrawal - 1) / per_withdrawal;
    for (std::size_t p = 0; p < n_payers; ++p) {
        t.wallets.push_back({"payer-" + std::to_string(p), 0});
        t.accounts.push_back({"payer-acct-" + std::to_string(p), static_cast<NodeId>(p % t.validators),
                              KycTier::Basic, 1'000'000'000, true});
    }
    for (std::size_t m = 0; m < t.validators; ++m) {
        t.accounts.push_back({"shop-" + std::to_string(m), static_cast<NodeId>(m), KycTier::Verified, 0, true});
    }

    std::vector<std::vector<Amount>> holdings(n_payers);
    TimeMs at = 100;
    for (std::size_t k = 0; k < withdrawals; ++k) {
        auto p = k % n_payers;
        Action a;
        a.kind = ActionKind::Withdraw;
        a.at = at;
        a.wallet = "payer-" + std::to_string(p);
        a.account = "payer-acct-" + std::to_string(p);
        a.amount = 1023;
        a.expect = "commit";
        s.actions.push_back(std::move(a));
        holdings[p].insert(holdings[p].end(), t.denominations.begin(), t.denominations.end());
        at += 2;
    }
    at += 2'000;

    std::vector<std::size_t> order;
    for (std::size_t p = 0; p < n_payers; ++p) {
        rng.shuffle(holdings[p].begin(), holdings[p].end());
        for (std::size_t k = 0; k < holdings[p].size(); ++k) {
            order.push_back(p);
        }
    }
    rng.shuffle(order.begin(), order.end());
    order.resize(std::min(order.size(), deposits));

    const auto duplicates = static_cast<std::size_t>(static_cast<double>(deposits) * duplicate_fraction + 0.5);
    std::vector<bool> dup(order.size(), false);
    for (std::size_t i = 0; i < duplicates && i < order.size(); ++i) {
        dup[i] = true;
    }
    rng.shuffle(dup.begin(), dup.end());

    auto shop = [&](std::size_t m) { return "shop-" + std::to_string(m); };
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto p = order[i];
        auto amount = holdings[p].back();
        holdings[p].pop_back();
        Action a;
        a.at = at;
        a.wallet = "payer-" + std::to_string(p);
        a.amount = amount;
        auto m = rng.uniform(t.validators);
        if (dup[i]) {
            a.kind = ActionKind::DoubleSpend;
            auto other = (m + 1 + rng.uniform(t.validators - 1)) % t.validators;
            a.accounts = {shop(m), shop(other)};
            // Half race at the same instant on two MSBs, half replay later.
            a.gap_ms = rng.chance(0.5) ? 0 : rng.between(500, 5'000);
            a.expect = "one_commit";
        } else {
            a.kind = ActionKind::Deposit;
            a.account = shop(m);
            a.expect = "commit";
        }
        s.actions.push_back(std::move(a));
        at += 3;
    }
    s.expect.rejects["DoubleSpend"] = {duplicates, true};
    if (duplicates > 0) s.expect.alerts["DoubleSpendRate"] = {1, true};
    return s;
}

}  // namespace cbdc

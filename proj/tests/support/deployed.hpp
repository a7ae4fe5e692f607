#pragma once

// A deployment without consensus: one LedgerState stands in for the
// replicated log, and every committed record is fed to the bank and MSBs in
// order, as the cluster's commit hooks would.

#include "cbdc/harness.hpp"

#include <memory>
#include <vector>

namespace cbdc::testing {

struct Deployed {
    Deployment d;
    LedgerState ledger;
    std::vector<std::unique_ptr<Msb>> msbs;

    explicit Deployed(const TopologyConfig& t, std::uint64_t seed = 3)
        : d(deploy(t, seed)), ledger(d.genesis) {
        for (const auto& v : d.genesis->validators) {
            msbs.push_back(std::make_unique<Msb>(d.genesis, v.id, d.validator_keys[v.id], d.account_salts[v.id]));
        }
        for (const auto& a : t.accounts) {
            msbs[a.msb]->open_account(a.id, a.tier, a.balance);
        }
    }

    std::shared_ptr<const Genesis> genesis() const { return d.genesis; }
    CentralBank& bank() { return *d.bank; }
    Msb& msb(NodeId id) { return *msbs.at(id); }

    const LogRecord& commit(const LedgerEntry& e) {
        const auto& rec = ledger.execute(e);
        d.bank->on_commit(rec);
        for (auto& m : msbs) {
            m->on_commit(rec);
        }
        return rec;
    }

    const std::vector<BlindSignature>& signatures(const LogRecord& rec) const {
        return *d.bank->signatures_for(rec.entry_hash);
    }
};

inline TopologyConfig small_topology(std::vector<AccountSpec> accounts = {}, PolicyConfig policy = {},
                                     std::vector<Amount> denoms = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512}) {
    TopologyConfig t;
    t.validators = 4;
    t.denominations = std::move(denoms);
    t.policy = policy;
    t.accounts = std::move(accounts);
    return t;
}

}  // namespace cbdc::testing

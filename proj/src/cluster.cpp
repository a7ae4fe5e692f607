#include "cbdc/error.hpp"
#include "cbdc/harness.hpp"

#include <algorithm>
#include <set>

namespace cbdc {

Cluster::Cluster(const TopologyConfig& topology, std::uint64_t seed, ClusterOptions options)
    : deployment_(deploy(topology, seed)), options_(std::move(options)), seed_(seed) {
    sim_ = std::make_unique<Simulator>(options_.sim);
    const auto& g = deployment_.genesis;

    ReplicaConfig base;
    base.batch_size = options_.batch_size;
    base.window = options_.window;
    base.timeout_ms = options_.timeout_ms;
    base.ledger = options_.ledger;
    if (options_.bank_observer) base.observers = {kCentralBankId};

    if (options_.record_dir) std::filesystem::create_directories(*options_.record_dir);
    for (const auto& v : g->validators) {
        auto rc = base;
        rc.id = v.id;
        rc.equivocating = [this, id = v.id] { return sim_->behaves(id, BehaviorKind::Equivocate); };
        replicas_.push_back(std::make_unique<Replica>(g, rc, deployment_.validator_keys[v.id], *sim_));
        sim_->add_node(v.id, replicas_.back().get());

        std::optional<std::filesystem::path> file;
        if (options_.record_dir) {
            file = *options_.record_dir / ("msb-" + std::to_string(v.id) + ".jsonl");
            std::filesystem::remove(*file);
        }
        msbs_.push_back(std::make_unique<Msb>(g, v.id, deployment_.validator_keys[v.id],
                                              deployment_.account_salts[v.id], file));
        replicas_.back()->add_commit_hook([m = msbs_.back().get()](const LogRecord& r) { m->on_commit(r); });
    }
    for (const auto& a : topology.accounts) {
        msbs_.at(a.msb)->open_account(a.id, a.tier, a.balance);
        account_home_[a.id] = a.msb;
    }

    if (options_.bank_observer) {
        auto rc = base;
        rc.id = kCentralBankId;
        rc.observer = true;
        bank_replica_ = std::make_unique<Replica>(g, rc, std::nullopt, *sim_);
        sim_->add_node(kCentralBankId, bank_replica_.get());
        bank_replica_->add_commit_hook([this](const LogRecord& r) {
            deployment_.bank->on_commit(r);
            auto it = settle_.find(r.entry_hash);
            if (it == settle_.end()) return;
            auto fn = std::move(it->second);
            settle_.erase(it);
            fn(r);
        });
    }
    for (const auto& w : topology.wallets) {
        add_wallet(w.name, w.spend_delay_ms);
    }
}

Hash256 wallet_seed(std::uint64_t seed, std::string_view name) {
    return Sha256().update("cbdc/wallet-rng/v1").update_u64(seed).update(name).finish();
}

Wallet& Cluster::add_wallet(const std::string& name, TimeMs spend_delay) {
    if (wallets_.contains(name)) throw Error(Errc::ConfigError, "duplicate wallet '" + name + "'");
    Rng rng(wallet_seed(seed_, name));
    auto w = std::make_unique<Wallet>(deployment_.genesis, std::move(rng), spend_delay);
    return *wallets_.emplace(name, std::move(w)).first->second;
}

Wallet& Cluster::wallet(const std::string& name) {
    auto it = wallets_.find(name);
    if (it == wallets_.end()) throw Error(Errc::ConfigError, "unknown wallet '" + name + "'");
    return *it->second;
}

NodeId Cluster::msb_of(const std::string& account_id) const {
    auto it = account_home_.find(account_id);
    if (it == account_home_.end()) throw Error(Errc::UnknownAccount, account_id);
    return it->second;
}

Verdict Cluster::submit(NodeId via, const LedgerEntry& entry, Settle settle) {
    auto hash = entry.hash();
    if (settle && bank_replica_) settle_.emplace(hash, std::move(settle));
    auto verdict = replicas_.at(via)->submit(entry);
    if (!verdict.accepted()) settle_.erase(hash);
    return verdict;
}

bool Cluster::byzantine(NodeId id) const {
    return sim_->behaves(id, BehaviorKind::Equivocate) || sim_->behaves(id, BehaviorKind::Corrupt);
}

NodeId Cluster::reference() const {
    for (const auto& r : replicas_) {
        if (!byzantine(r->id()) && !sim_->behaves(r->id(), BehaviorKind::Mute)) return r->id();
    }
    for (const auto& r : replicas_) {
        if (!byzantine(r->id())) return r->id();
    }
    return 0;
}

std::map<KeyId, Amount> Cluster::wallet_outstanding() const {
    std::map<KeyId, Amount> out;
    for (const auto& [name, w] : wallets_) {
        for (const auto& t : w->tokens()) {
            out[t.token.certificate.key_id] += t.denomination;
        }
        for (const auto* t : w->in_flight()) {
            out[t->token.certificate.key_id] += t->denomination;
        }
    }
    return out;
}

std::vector<std::string> Cluster::check_invariants() const {
    std::vector<std::string> bad;
    if (!settle_.empty()) bad.push_back(std::to_string(settle_.size()) + " submitted entries never settled");

    // Safety: honest replicas (and the bank observer) agree on every sequence
    // they have both executed.
    std::vector<const Replica*> honest;
    for (const auto& r : replicas_) {
        if (!byzantine(r->id())) honest.push_back(r.get());
    }
    if (bank_replica_) honest.push_back(bank_replica_.get());
    for (std::size_t i = 0; i < honest.size(); ++i) {
        for (std::size_t j = i + 1; j < honest.size(); ++j) {
            const auto& a = honest[i]->executed_digests();
            const auto& b = honest[j]->executed_digests();
            auto n = std::min(a.size(), b.size());
            for (std::size_t k = 0; k < n; ++k) {
                if (a[k] != b[k]) {
                    bad.push_back("conflicting commits at seq " + std::to_string(k + 1) + " between " +
                                  std::to_string(honest[i]->id()) + " and " + std::to_string(honest[j]->id()));
                    break;
                }
            }
        }
    }

    const auto& ref = replicas_.at(reference())->ledger();
    if (bank_replica_) {
        if (bank_replica_->ledger().height() != ref.height()) {
            bad.push_back("bank observer at height " + std::to_string(bank_replica_->ledger().height()) +
                          ", reference at " + std::to_string(ref.height()));
        }
        // Conservation per (denomination, vintage): ledger, issuer and wallets.
        auto held = wallet_outstanding();
        for (const auto& [id, key] : deployment_.genesis->issuers.keys()) {
            auto lt = ref.totals(id);
            auto bt = deployment_.bank->totals(id);
            auto w = held.contains(id) ? held.at(id) : 0;
            auto label = std::to_string(key.denomination) + "/" + std::to_string(key.vintage);
            if (lt != bt) {
                bad.push_back("key " + label + ": ledger issued/redeemed " + std::to_string(lt.issued) + "/" +
                              std::to_string(lt.redeemed) + ", bank " + std::to_string(bt.issued) + "/" +
                              std::to_string(bt.redeemed));
            }
            if (lt.outstanding() != w) {
                bad.push_back("key " + label + ": outstanding " + std::to_string(lt.outstanding()) +
                              ", wallets hold " + std::to_string(w));
            }
        }
        for (const auto& [msb, amount] : ref.reserves()) {
            if (deployment_.bank->reserve(msb) != amount) {
                bad.push_back("bank reserve mirror for msb " + std::to_string(msb) + " is " +
                              std::to_string(deployment_.bank->reserve(msb)) + ", ledger " + std::to_string(amount));
            }
        }
    }
    for (const auto& [name, w] : wallets_) {
        for (const auto& t : w->tokens()) {
            if (ref.spent().contains(t.token.id())) {
                bad.push_back("wallet " + name + " holds spent token " + t.token.id().short_hex());
            }
        }
    }
    for (const auto& m : msbs_) {
        const auto& r = *replicas_.at(m->id());
        if (r.ledger().height() == ref.height() && m->reserve() != ref.reserve(m->id())) {
            bad.push_back("msb " + std::to_string(m->id()) + " reserve view " + std::to_string(m->reserve()) +
                          ", ledger " + std::to_string(ref.reserve(m->id())));
        }
        if (m->pending() != 0) {
            bad.push_back("msb " + std::to_string(m->id()) + " has " + std::to_string(m->pending()) +
                          " unsettled holds");
        }
    }
    // Every token is an input of at most one accepted entry.
    if (options_.ledger.retain_log) {
        std::set<TokenId> spent;
        for (const auto& rec : ref.log()) {
            if (!rec.outcome.accepted()) continue;
            for (const auto& in : rec.entry.inputs()) {
                if (!spent.insert(in.token_id).second) {
                    bad.push_back("token " + in.token_id.short_hex() + " spent twice");
                }
            }
        }
    }
    return bad;
}

}  // namespace cbdc

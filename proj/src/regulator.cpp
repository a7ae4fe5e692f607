#include "cbdc/regulator.hpp"

#include "cbdc/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>

namespace cbdc {

std::string_view to_string(AlertKind k) noexcept {
    switch (k) {
        case AlertKind::InvalidDestination: return "InvalidDestination";
        case AlertKind::DoubleSpendRate: return "DoubleSpendRate";
        case AlertKind::WithdrawalVelocity: return "WithdrawalVelocity";
        case AlertKind::ByzantineEvidence: return "ByzantineEvidence";
    }
    return "?";
}

std::string_view to_string(LinkStrategy s) noexcept {
    return s == LinkStrategy::EarliestAfter ? "earliest-after" : "random";
}

nlohmann::json Alert::to_json() const {
    return {{"kind", "alert"}, {"alert", to_string(kind)}, {"msb", msb}, {"height", height}, {"detail", detail}};
}

std::vector<nlohmann::json> Report::lines() const {
    std::vector<nlohmann::json> out;
    out.push_back({{"kind", "summary"},
                   {"height", height},
                   {"state_hash", state_hash.hex()},
                   {"chain_head", chain_head.hex()},
                   {"outstanding", outstanding}});
    for (const auto& s : supply) {
        out.push_back({{"kind", "supply"},
                       {"key_id", s.key_id.hex()},
                       {"denomination", s.denomination},
                       {"vintage", s.vintage},
                       {"issued", s.issued},
                       {"redeemed", s.redeemed},
                       {"outstanding", s.outstanding()}});
    }
    for (const auto& [v, amount] : outstanding_by_vintage) {
        out.push_back({{"kind", "vintage"}, {"vintage", v}, {"outstanding", amount}});
    }
    for (const auto& [id, a] : activity) {
        out.push_back({{"kind", "msb"},
                       {"submitter", id},
                       {"entries", a.entries},
                       {"accepted", a.accepted},
                       {"rejected", a.rejected()},
                       {"rejects", a.rejects},
                       {"value_in", a.value_in},
                       {"value_out", a.value_out}});
    }
    return out;
}

AuditReplica::AuditReplica(std::shared_ptr<const Genesis> genesis, AlertConfig config)
    : genesis_(genesis), config_(config), ledger_(std::move(genesis)) {}

void AuditReplica::ingest(const AuditBatch& batch) {
    if (batch.from_height > height()) {
        throw Error(Errc::GapDetected, "stream starts at " + std::to_string(batch.from_height) +
                                           ", replica is at " + std::to_string(height()));
    }
    auto expected = batch.from_height + 1;
    for (const auto& rec : batch.records) {
        if (rec.height != expected) {
            throw Error(Errc::GapDetected, "expected height " + std::to_string(expected) + ", got " +
                                               std::to_string(rec.height));
        }
        ++expected;
        if (rec.entry.hash() != rec.entry_hash) {
            throw Error(Errc::HashMismatch, "entry hash at height " + std::to_string(rec.height));
        }
        if (rec.height <= height()) {
            if (ledger_.log()[rec.height - 1].chain_hash != rec.chain_hash) {
                throw Error(Errc::HashMismatch, "chain diverges at height " + std::to_string(rec.height));
            }
            continue;
        }
        auto verdict = ledger_.validate(rec.entry);
        if (verdict != rec.outcome) {
            throw Error(Errc::HashMismatch, "outcome at height " + std::to_string(rec.height) + ": stream says " +
                                                rec.outcome.describe() + ", replay gives " + verdict.describe());
        }
        const auto& mine = ledger_.execute(rec.entry, true);
        if (mine.state_hash != rec.state_hash || mine.chain_hash != rec.chain_hash) {
            throw Error(Errc::HashMismatch, "state at height " + std::to_string(rec.height));
        }
        observe(mine);
    }
    for (const auto& cp : batch.checkpoints) {
        if (cp.height == 0 || cp.height > height()) continue;
        const auto& rec = ledger_.log()[cp.height - 1];
        if (rec.chain_hash != cp.chain_hash || rec.state_hash != cp.state_hash) {
            throw Error(Errc::HashMismatch, "checkpoint at height " + std::to_string(cp.height));
        }
    }
}

void AuditReplica::observe(const LogRecord& rec) {
    const auto& e = rec.entry;
    auto& a = activity_[e.submitter];
    ++a.entries;
    const bool ok = rec.outcome.accepted();
    if (ok) {
        ++a.accepted;
    } else {
        ++a.rejects[std::string(to_string(rec.outcome.code))];
    }
    if (!e.inputs().empty()) {
        ++a.spend_entries;
        if (rec.outcome.code == RejectCode::DoubleSpend) ++a.double_spends;
    }
    if (ok) {
        for (const auto& in : e.inputs()) {
            a.value_in += genesis_->issuers.at(in.certificate.key_id).denomination;
        }
        for (const auto& out : e.outputs()) {
            a.value_out += genesis_->issuers.at(out.key_id).denomination;
        }
    }
    if (const auto* w = std::get_if<WithdrawalPayload>(&e.payload)) {
        if (ok || rec.outcome.rule == PolicyRule::MsbWithdrawalVelocity) {
            a.attempted_withdrawals[e.timestamp / genesis_->policy.day_ms] += w->amount;
        }
    }
    if (const auto* d = std::get_if<DepositPayload>(&e.payload);
        d && ok && !genesis_->registered_commitments.contains(d->account_commitment)) {
        destination_alerts_.push_back({AlertKind::InvalidDestination, e.submitter, rec.height,
                                       "deposit to unregistered account " + d->account_commitment.short_hex()});
    }
}

bool AuditReplica::add_evidence(const EquivocationEvidence& evidence) {
    if (!evidence.verify(*genesis_)) return false;
    evidence_.emplace(std::make_tuple(evidence.equivocator, evidence.view, evidence.seq), evidence);
    return true;
}

Report AuditReplica::report() const {
    Report r;
    r.height = height();
    r.state_hash = state_hash();
    r.chain_head = chain_head();
    for (const auto& [id, totals] : ledger_.totals()) {
        const auto& key = genesis_->issuers.at(id);
        SupplyLine line{id, key.denomination, key.vintage, totals.issued, totals.redeemed};
        r.outstanding_by_vintage[key.vintage] += line.outstanding();
        r.outstanding += line.outstanding();
        r.supply.push_back(line);
    }
    std::sort(r.supply.begin(), r.supply.end(), [](const auto& a, const auto& b) {
        return std::tie(a.vintage, a.denomination) < std::tie(b.vintage, b.denomination);
    });
    r.activity = activity_;
    return r;
}

std::vector<Alert> AuditReplica::detect_anomalies() const {
    std::vector<Alert> out = destination_alerts_;
    const Amount velocity =
        config_.withdrawal_velocity > 0 ? config_.withdrawal_velocity : genesis_->policy.msb_daily_withdrawal_cap;
    for (const auto& [id, a] : activity_) {
        if (a.spend_entries > 0) {
            double rate = static_cast<double>(a.double_spends) / static_cast<double>(a.spend_entries);
            if (rate > config_.double_spend_rate) {
                out.push_back({AlertKind::DoubleSpendRate, id, 0,
                               std::to_string(a.double_spends) + " of " + std::to_string(a.spend_entries) +
                                   " spend entries rejected as double spends"});
            }
        }
        for (const auto& [day, amount] : a.attempted_withdrawals) {
            if (amount > velocity) {
                out.push_back({AlertKind::WithdrawalVelocity, id, 0,
                               "day " + std::to_string(day) + ": " + std::to_string(amount) + " > " +
                                   std::to_string(velocity)});
            }
        }
    }
    for (const auto& [key, ev] : evidence_) {
        out.push_back({AlertKind::ByzantineEvidence, ev.equivocator, 0,
                       "conflicting proposals at view " + std::to_string(ev.view) + " seq " +
                           std::to_string(ev.seq)});
    }
    return out;
}

LinkObservations linkage_observations(const std::vector<LogRecord>& log) {
    LinkObservations obs;
    for (const auto& rec : log) {
        if (!rec.outcome.accepted()) continue;
        const auto& e = rec.entry;
        if (const auto* w = std::get_if<WithdrawalPayload>(&e.payload)) {
            obs.withdrawals.push_back({rec.entry_hash, rec.height, e.timestamp, w->amount});
        } else if (const auto* d = std::get_if<DepositPayload>(&e.payload)) {
            obs.deposits.push_back({rec.entry_hash, rec.height, e.timestamp, d->credit});
        }
    }
    return obs;
}

std::vector<std::size_t> link(const LinkObservations& obs, LinkStrategy strategy, Rng& rng) {
    const auto& ws = obs.withdrawals;
    const auto& ds = obs.deposits;
    std::vector<std::size_t> match(ds.size(), ws.size());
    std::vector<bool> used(ws.size(), false);

    auto before = [](const LinkObservation& a, const LinkObservation& b) {
        return std::tie(a.time, a.height) < std::tie(b.time, b.height);
    };
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> w_order(ws.size());
    std::iota(w_order.begin(), w_order.end(), 0);

    if (strategy == LinkStrategy::EarliestAfter) {
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return before(ds[a], ds[b]); });
        std::stable_sort(w_order.begin(), w_order.end(), [&](auto a, auto b) { return before(ws[a], ws[b]); });
    } else {
        rng.shuffle(order.begin(), order.end());
        rng.shuffle(w_order.begin(), w_order.end());
    }

    // Pass 1 honours amounts (and, for the timing strategy, causality);
    // pass 2 pairs whatever is left.
    for (int pass = 0; pass < 2; ++pass) {
        for (auto di : order) {
            if (match[di] != ws.size()) continue;
            for (auto wi : w_order) {
                if (used[wi]) continue;
                if (pass == 0) {
                    if (ws[wi].amount != ds[di].amount) continue;
                    if (strategy == LinkStrategy::EarliestAfter && !before(ws[wi], ds[di])) continue;
                }
                match[di] = wi;
                used[wi] = true;
                break;
            }
        }
    }
    return match;
}

LinkageResult linkage_attack(const LinkObservations& obs, LinkStrategy strategy,
                             const std::map<Hash256, Hash256>& truth, Rng& rng) {
    LinkageResult r;
    r.matching = link(obs, strategy, rng);
    for (std::size_t i = 0; i < obs.deposits.size(); ++i) {
        auto wi = r.matching[i];
        if (wi >= obs.withdrawals.size()) continue;
        auto it = truth.find(obs.deposits[i].entry_hash);
        if (it != truth.end() && it->second == obs.withdrawals[wi].entry_hash) ++r.correct;
    }
    r.accuracy = obs.deposits.empty() ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(obs.deposits.size());
    return r;
}

}  // namespace cbdc

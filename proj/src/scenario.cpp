// Scenario execution: actions become wallet/MSB exchanges, entries go
// through consensus, and the run is judged by its expectations plus the
// global invariants.

#include "cbdc/bigint.hpp"
#include "cbdc/error.hpp"
#include "cbdc/harness.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace cbdc {
namespace {

std::string error_result(const Error& e) { return "error:" + std::string(to_string(e.code())); }

std::string verdict_result(const Verdict& v) {
    return v.accepted() ? "committed" : "rejected:" + std::string(to_string(v.code));
}

struct DoubleSpendState {
    std::string wallet;
    PaymentBundle bundle;
    std::size_t outstanding = 0;
    bool original_accepted = false;
    bool any_accepted = false;
    bool saw_double_spend = false;
};

class Runner {
public:
    Runner(const Scenario& scenario, const RunOptions& options)
        : sc_(scenario), opt_(options), cluster_(scenario.topology, scenario.seed, cluster_options(scenario, options)),
          rng_(Sha256().update("cbdc/runner/v1").update_u64(scenario.seed).finish()) {
        res_.name = scenario.name;
        res_.outcomes.resize(scenario.actions.size());
        for (std::size_t i = 0; i < scenario.actions.size(); ++i) {
            res_.outcomes[i].index = i;
            res_.outcomes[i].kind = scenario.actions[i].kind;
        }
        if (opt_.capture_transcript) {
            cluster_.sim().set_tap([this](NodeId, NodeId, std::string_view, const SharedBytes& m) {
                res_.network.push_back(*m);
            });
            for (const auto& a : scenario.topology.accounts) {
                res_.secrets.emplace_back("account id " + a.id, Bytes(a.id.begin(), a.id.end()));
            }
            for (const auto& w : scenario.topology.wallets) {
                res_.secrets.emplace_back("wallet name " + w.name, Bytes(w.name.begin(), w.name.end()));
                auto seed = wallet_seed(scenario.seed, w.name);
                res_.secrets.emplace_back("wallet seed " + w.name, Bytes(seed.bytes.begin(), seed.bytes.end()));
            }
        }
    }

    RunResult run() {
        TimeMs last = 0;
        for (std::size_t i = 0; i < sc_.actions.size(); ++i) {
            const auto& a = sc_.actions[i];
            auto end = a.at + a.gap_ms * (a.accounts.empty() ? 0 : a.accounts.size() - 1);
            last = std::max(last, end);
            cluster_.sim().schedule(a.at, [this, i] { perform(i); });
        }
        auto& sim = cluster_.sim();
        sim.run_until(last);
        const TimeMs deadline = last + sc_.settle_ms;
        bool settled = sim.run_until_done([this] { return quiescent(); }, deadline);
        if (!settled) {
            res_.failures.push_back("not settled by t=" + std::to_string(deadline) + " ms (" +
                                    std::to_string(cluster_.unsettled()) + " entries outstanding)");
        }
        finish();
        return std::move(res_);
    }

private:
    static ClusterOptions cluster_options(const Scenario& sc, const RunOptions& opt) {
        auto o = sc.cluster;
        o.sim.record_trace = opt.keep_trace;
        return o;
    }

    bool quiescent() const {
        if (cluster_.unsettled() != 0 || !double_spends_.empty()) return false;
        const auto* bank = cluster_.bank_replica();
        auto target = bank ? bank->last_executed() : cluster_.replica(cluster_.reference()).last_executed();
        for (std::size_t i = 0; i < cluster_.size(); ++i) {
            const auto& r = cluster_.replica(static_cast<NodeId>(i));
            if (cluster_.byzantine(r.id())) continue;
            if (r.last_executed() != target || r.pending() != 0) return false;
        }
        return true;
    }

    TimeMs now() const { return cluster_.sim().now(); }

    std::size_t open_result(std::size_t i) {
        res_.outcomes[i].results.push_back("pending");
        return res_.outcomes[i].results.size() - 1;
    }

    void set_result(std::size_t i, std::size_t slot, std::string r) { res_.outcomes[i].results[slot] = std::move(r); }

    std::size_t new_session() { return next_session_++; }

    template <class Msg>
    void transcript(const std::string& wallet, std::size_t session, std::size_t linked, std::string kind,
                    const Msg& m) {
        if (!opt_.capture_transcript) return;
        res_.transcript.push_back({wallet, session, linked, std::move(kind), m.encode(), fields_of(m)});
    }

    // A payment that fails hands its tokens back to the wallet; presenting
    // them again repeats the session that first disclosed them.
    std::size_t payment_session(const std::string& wallet, const std::vector<SpendInput>& inputs,
                                std::size_t& linked) {
        auto session = new_session();
        linked = 0;
        auto& seen = exposed_[wallet];
        for (const auto& in : inputs) {
            auto it = seen.find(in.token_id);
            if (it != seen.end()) linked = it->second;
        }
        for (const auto& in : inputs) seen.emplace(in.token_id, linked != 0 ? linked : session);
        return session;
    }

    void capture_factors(const Wallet& w) {
        if (!opt_.capture_transcript) return;
        for (const auto& f : w.pending_factors()) {
            auto width = cluster_.genesis()->issuers.at(f.key_id).modulus_bytes();
            auto bytes = bigint_to_bytes(f.r, width);
            if (factors_seen_.insert(bytes).second) res_.secrets.emplace_back("blinding factor", std::move(bytes));
        }
    }

    void perform(std::size_t i) {
        const auto& a = sc_.actions[i];
        try {
            switch (a.kind) {
                case ActionKind::Withdraw: withdraw(i, a); break;
                case ActionKind::Deposit: deposit(i, a); break;
                case ActionKind::Mediate: mediate(i, a); break;
                case ActionKind::Disburse: disburse(i, a); break;
                case ActionKind::DoubleSpend: double_spend(i, a); break;
                case ActionKind::ReserveExchange: reserve_exchange(i, a); break;
            }
        } catch (const Error& e) {
            res_.outcomes[i].results.push_back(error_result(e));
        }
    }

    /// Submits and arranges for `on_commit` at settlement. Returns false when
    /// the entry was refused before consensus.
    bool submit(std::size_t i, NodeId via, const LedgerEntry& entry, std::function<void(const LogRecord&)> on_commit,
                std::size_t slot) {
        res_.outcomes[i].entries.push_back(entry.hash());
        auto verdict = cluster_.submit(via, entry, [this, i, slot, f = std::move(on_commit)](const LogRecord& r) {
            set_result(i, slot, verdict_result(r.outcome));
            try {
                f(r);
            } catch (const Error& e) {
                set_result(i, slot, error_result(e));
            }
        });
        if (!verdict.accepted()) {
            set_result(i, slot, verdict_result(verdict));
            return false;
        }
        return true;
    }

    const std::vector<BlindSignature>& signatures(const LogRecord& r) const {
        const auto* sigs = cluster_.bank().signatures_for(r.entry_hash);
        if (sigs == nullptr) throw Error(Errc::NotCommitted, "no signatures for " + r.entry_hash.short_hex());
        return *sigs;
    }

    void withdraw(std::size_t i, const Action& a) {
        auto& w = cluster_.wallet(a.wallet);
        auto m = cluster_.msb_of(a.account);
        auto plan = w.plan_withdrawal(a.amount);
        capture_factors(w);
        transcript(a.wallet, new_session(), 0, "withdrawal", plan.request);
        LedgerEntry entry;
        try {
            entry = cluster_.msb(m).request_withdrawal(a.account, plan.request, now());
        } catch (const Error&) {
            w.abandon(plan.session);
            throw;
        }
        auto slot = open_result(i);
        auto hash = entry.hash();
        auto count = plan.denominations.size();
        bool ok = submit(i, m, entry, [this, &w, session = plan.session, hash, count](const LogRecord& r) {
            if (!r.outcome.accepted()) {
                w.abandon(session);
                return;
            }
            auto before = w.tokens().size();
            w.finalize_withdrawal(session, signatures(r), now());
            for (auto k = before; k < w.tokens().size(); ++k) {
                token_origin_[w.tokens()[k].token.id()] = hash;
            }
            withdrawal_size_[hash] = count;
        }, slot);
        if (!ok) w.abandon(plan.session);
    }

    void note_linkage(const LogRecord& r) {
        if (!r.outcome.accepted()) return;
        const auto& inputs = r.entry.inputs();
        if (inputs.empty()) return;
        std::optional<Hash256> origin;
        for (const auto& in : inputs) {
            auto it = token_origin_.find(in.token_id);
            if (it == token_origin_.end() || (origin && *origin != it->second)) return;
            origin = it->second;
        }
        if (withdrawal_size_.at(*origin) == inputs.size()) res_.linkage_truth[r.entry_hash] = *origin;
    }

    void deposit(std::size_t i, const Action& a) {
        auto& w = cluster_.wallet(a.wallet);
        auto m = cluster_.msb_of(a.account);
        auto& msb = cluster_.msb(m);
        auto quote = msb.quote(now());
        auto bundle = w.make_payment(a.amount, quote, now());
        capture_factors(w);
        DepositSubmission sub{bundle.inputs, bundle.change};
        std::size_t linked = 0;
        auto session = payment_session(a.wallet, sub.inputs, linked);
        transcript(a.wallet, session, linked, "deposit", sub);
        LedgerEntry entry;
        try {
            entry = msb.receive_deposit(quote, sub, a.account);
        } catch (const Error&) {
            w.settle_payment(bundle, false, false);
            throw;
        }
        auto slot = open_result(i);
        bool ok = submit(i, m, entry, [this, &w, bundle](const LogRecord& r) {
            const bool accepted = r.outcome.accepted();
            if (accepted && bundle.change_session != 0) w.finalize_withdrawal(bundle.change_session, signatures(r), now());
            w.settle_payment(bundle, accepted, r.outcome.code == RejectCode::DoubleSpend);
            note_linkage(r);
        }, slot);
        if (!ok) w.settle_payment(bundle, false, false);
    }

    void mediate(std::size_t i, const Action& a) {
        auto& payer = cluster_.wallet(a.wallet);
        auto& payee = cluster_.wallet(a.payee);
        auto& msb = cluster_.msb(a.msb);
        const auto& g = *cluster_.genesis();
        const Amount fee = required_mediated_fee(g.policy, {g.vintage}, {g.vintage});
        auto quote = msb.quote(now());
        auto bundle = payer.make_payment(a.amount + fee, quote, now());
        WithdrawalPlan plan;
        try {
            plan = payee.plan_receive(a.amount);
        } catch (const Error&) {
            payer.settle_payment(bundle, false, false);
            throw;
        }
        capture_factors(payer);
        capture_factors(payee);
        transcript(a.payee, new_session(), 0, "receive", plan.request);

        MediationRequest req{bundle.inputs, plan.request.outputs, std::nullopt};
        req.outputs.insert(req.outputs.end(), bundle.change.begin(), bundle.change.end());
        if (a.id_info) {
            // Opaque, per-transaction attestation; only its presence reaches the ledger.
            Bytes att(32);
            rng_.fill(att);
            req.id_attestation = std::move(att);
        }
        std::size_t linked = 0;
        auto session = payment_session(a.wallet, req.inputs, linked);
        transcript(a.wallet, session, linked, "mediation", req);
        LedgerEntry entry;
        try {
            entry = msb.mediate_transfer(quote, req);
        } catch (const Error&) {
            payer.settle_payment(bundle, false, false);
            payee.abandon(plan.session);
            throw;
        }
        auto slot = open_result(i);
        auto n_payee = plan.denominations.size();
        bool ok = submit(i, a.msb, entry,
                         [this, &payer, &payee, bundle, session = plan.session, n_payee](const LogRecord& r) {
                             if (!r.outcome.accepted()) {
                                 payee.abandon(session);
                                 payer.settle_payment(bundle, false, r.outcome.code == RejectCode::DoubleSpend);
                                 return;
                             }
                             const auto& sigs = signatures(r);
                             std::vector<BlindSignature> to_payee(sigs.begin(), sigs.begin() + static_cast<std::ptrdiff_t>(n_payee));
                             std::vector<BlindSignature> change(sigs.begin() + static_cast<std::ptrdiff_t>(n_payee), sigs.end());
                             payee.finalize_withdrawal(session, to_payee, now());
                             if (bundle.change_session != 0) payer.finalize_withdrawal(bundle.change_session, change, now());
                             payer.settle_payment(bundle, true, true);
                         },
                         slot);
        if (!ok) {
            payee.abandon(plan.session);
            payer.settle_payment(bundle, false, false);
        }
    }

    void disburse(std::size_t i, const Action& a) {
        auto& w = cluster_.wallet(a.wallet);
        auto& msb = cluster_.msb(a.msb);
        auto plan = w.plan_withdrawal(a.amount);
        capture_factors(w);
        transcript(a.wallet, new_session(), 0, "disbursement", plan.request);
        auto claim_ref = Sha256().update("cbdc/claim/v1").update(a.claim).finish();
        LedgerEntry entry;
        try {
            entry = msb.disburse(claim_ref, a.verified, plan.request.outputs, a.treasury, now());
        } catch (const Error&) {
            w.abandon(plan.session);
            throw;
        }
        auto slot = open_result(i);
        bool ok = submit(i, a.msb, entry, [this, &w, session = plan.session](const LogRecord& r) {
            if (r.outcome.accepted()) {
                w.finalize_withdrawal(session, signatures(r), now());
            } else {
                w.abandon(session);
            }
        }, slot);
        if (!ok) w.abandon(plan.session);
    }

    void double_spend(std::size_t i, const Action& a) {
        auto& w = cluster_.wallet(a.wallet);
        auto m0 = cluster_.msb_of(a.accounts[0]);
        auto& msb0 = cluster_.msb(m0);
        auto quote = msb0.quote(now());
        auto state = std::make_shared<DoubleSpendState>();
        state->wallet = a.wallet;
        state->bundle = w.make_payment(a.amount, quote, now());
        capture_factors(w);
        DepositSubmission sub{state->bundle.inputs, state->bundle.change};
        const auto session = new_session();
        transcript(a.wallet, session, 0, "deposit", sub);
        LedgerEntry first;
        try {
            first = msb0.receive_deposit(quote, sub, a.accounts[0]);
        } catch (const Error&) {
            w.settle_payment(state->bundle, false, false);
            throw;
        }
        double_spends_.insert(i);
        state->outstanding = a.accounts.size();

        submit_spend(i, state, m0, first, true);
        for (std::size_t k = 1; k < a.accounts.size(); ++k) {
            auto replay = [this, i, state, session, account = a.accounts[k]] {
                try {
                    auto m = cluster_.msb_of(account);
                    auto& msb = cluster_.msb(m);
                    auto q = msb.quote(now());
                    auto b = cluster_.wallet(state->wallet).respend(state->bundle, q);
                    DepositSubmission again{b.inputs, {}};
                    transcript(state->wallet, new_session(), session, "deposit", again);
                    submit_spend(i, state, m, msb.receive_deposit(q, again, account), false);
                } catch (const Error& e) {
                    res_.outcomes[i].results.push_back(error_result(e));
                    spend_done(i, state);
                }
            };
            if (a.gap_ms == 0) {
                replay();
            } else {
                cluster_.sim().schedule(now() + a.gap_ms * k, replay);
            }
        }
    }

    void submit_spend(std::size_t i, const std::shared_ptr<DoubleSpendState>& state, NodeId m, const LedgerEntry& e,
                      bool original) {
        auto slot = open_result(i);
        bool ok = submit(i, m, e, [this, i, state, original](const LogRecord& r) {
            if (r.outcome.accepted()) {
                state->any_accepted = true;
                if (original) state->original_accepted = true;
                if (original && state->bundle.change_session != 0) {
                    cluster_.wallet(state->wallet).finalize_withdrawal(state->bundle.change_session, signatures(r), now());
                    state->bundle.change_session = 0;
                }
                note_linkage(r);
            }
            if (r.outcome.code == RejectCode::DoubleSpend) state->saw_double_spend = true;
            spend_done(i, state);
        }, slot);
        if (!ok) spend_done(i, state);
    }

    void spend_done(std::size_t i, const std::shared_ptr<DoubleSpendState>& state) {
        if (--state->outstanding != 0) return;
        auto& w = cluster_.wallet(state->wallet);
        if (state->bundle.change_session != 0) {
            w.abandon(state->bundle.change_session);
            state->bundle.change_session = 0;
        }
        w.settle_payment(state->bundle, state->any_accepted, state->any_accepted || state->saw_double_spend);
        double_spends_.erase(i);
    }

    void reserve_exchange(std::size_t i, const Action& a) {
        auto entry = cluster_.bank().reserve_exchange(a.msb, a.amount, a.direction, now());
        auto slot = open_result(i);
        submit(i, cluster_.reference(), entry, [](const LogRecord&) {}, slot);
    }

    bool expectation_met(const std::string& expect, const std::vector<std::string>& results) const {
        auto all = [&](auto pred) { return !results.empty() && std::all_of(results.begin(), results.end(), pred); };
        if (expect == "commit") return all([](const auto& r) { return r == "committed"; });
        if (expect == "reject") return all([](const auto& r) { return r.rfind("rejected:", 0) == 0; });
        if (expect.rfind("reject:", 0) == 0) {
            auto want = "rejected:" + expect.substr(7);
            return all([&](const auto& r) { return r == want; });
        }
        if (expect.rfind("error:", 0) == 0) return results.size() == 1 && results[0] == expect;
        if (expect == "one_commit") {
            auto commits = std::count(results.begin(), results.end(), "committed");
            auto doubles = std::count(results.begin(), results.end(), "rejected:DoubleSpend");
            return commits == 1 && doubles >= 1 && static_cast<std::size_t>(commits + doubles) == results.size();
        }
        return false;
    }

    void finish() {
        auto& sim = cluster_.sim();
        const auto ref_id = cluster_.reference();
        const auto& ref = cluster_.replica(ref_id);
        const auto& ledger = ref.ledger();
        res_.state_hash = ledger.state_hash();
        res_.chain_head = ledger.chain_head();
        res_.height = ledger.height();
        res_.trace_hash = sim.trace_hash();
        if (opt_.keep_trace) res_.trace_text = sim.export_trace();
        res_.log = ledger.log();
        res_.genesis = genesis_to_json(*cluster_.genesis());
        res_.max_view = ref.view();
        res_.wallet_holdings = cluster_.wallet_outstanding();

        auto invariants = cluster_.check_invariants();
        res_.failures.insert(res_.failures.end(), invariants.begin(), invariants.end());

        auto batch = ledger.audit_stream(0);
        res_.audit_stream = batch.encode();
        AuditReplica audit(cluster_.genesis());
        try {
            audit.ingest(AuditBatch::decode(res_.audit_stream));
            if (audit.state_hash() != res_.state_hash) res_.failures.push_back("audit replica state hash differs");
        } catch (const Error& e) {
            res_.failures.push_back(std::string("audit ingest: ") + e.what());
        }
        for (std::size_t i = 0; i < cluster_.size(); ++i) {
            const auto& r = cluster_.replica(static_cast<NodeId>(i));
            if (cluster_.byzantine(r.id())) continue;
            for (const auto& ev : r.evidence()) {
                audit.add_evidence(ev);
            }
        }
        res_.report = audit.report();
        res_.alerts = audit.detect_anomalies();
        std::uint64_t attributed = 0;
        for (const auto& [id, act] : res_.report.activity) {
            attributed += act.entries;
        }
        if (attributed != audit.height()) {
            res_.failures.push_back("attributed " + std::to_string(attributed) + " of " +
                                    std::to_string(audit.height()) + " entries");
        }

        for (std::size_t i = 0; i < sc_.actions.size(); ++i) {
            const auto& a = sc_.actions[i];
            const auto& results = res_.outcomes[i].results;
            if (a.expect && !expectation_met(*a.expect, results)) {
                std::string got;
                for (const auto& r : results) {
                    got += (got.empty() ? "" : ",") + r;
                }
                res_.failures.push_back("action " + std::to_string(i) + " (" + std::string(to_string(a.kind)) +
                                        "): expected " + *a.expect + ", got [" + got + "]");
            }
        }

        const auto& ex = sc_.expect;
        for (const auto& [id, want] : ex.account_balances) {
            auto got = cluster_.msb(cluster_.msb_of(id)).account(id).balance;
            if (got != want) {
                res_.failures.push_back("account " + id + ": balance " + std::to_string(got) + ", expected " +
                                        std::to_string(want));
            }
        }
        for (const auto& [name, want] : ex.wallet_balances) {
            auto got = cluster_.wallet(name).balance();
            if (got != want) {
                res_.failures.push_back("wallet " + name + ": balance " + std::to_string(got) + ", expected " +
                                        std::to_string(want));
            }
        }
        std::map<std::string, std::uint64_t> alert_counts;
        for (const auto& al : res_.alerts) {
            ++alert_counts[std::string(to_string(al.kind))];
        }
        for (const auto& [kind, want] : ex.alerts) {
            auto got = alert_counts[kind];
            if (!want.holds(got)) {
                res_.failures.push_back("alerts " + kind + ": " + std::to_string(got) + ", expected " + want.describe());
            }
        }
        std::map<std::string, std::uint64_t> reject_counts;
        for (const auto& [id, act] : res_.report.activity) {
            for (const auto& [code, n] : act.rejects) {
                reject_counts[code] += n;
            }
        }
        for (const auto& [code, want] : ex.rejects) {
            auto got = reject_counts[code];
            if (!want.holds(got)) {
                res_.failures.push_back("rejects " + code + ": " + std::to_string(got) + ", expected " + want.describe());
            }
        }
        if (ex.accepted && !ex.accepted->holds(ledger.accepted_count())) {
            res_.failures.push_back("accepted entries: " + std::to_string(ledger.accepted_count()) + ", expected " +
                                    ex.accepted->describe());
        }
        if (ex.max_view && ref.view() > *ex.max_view) {
            res_.failures.push_back("view " + std::to_string(ref.view()) + " exceeds " + std::to_string(*ex.max_view));
        }
        res_.passed = res_.failures.empty();
    }

    const Scenario& sc_;
    RunOptions opt_;
    Cluster cluster_;
    Rng rng_;
    RunResult res_;
    std::size_t next_session_ = 1;
    std::set<Bytes> factors_seen_;
    std::map<TokenId, Hash256> token_origin_;
    std::map<Hash256, std::size_t> withdrawal_size_;
    std::set<std::size_t> double_spends_;
    std::map<std::string, std::map<TokenId, std::size_t>> exposed_;
};

bool contains(const Bytes& hay, const Bytes& needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    return std::search(hay.begin(), hay.end(), std::boyer_moore_horspool_searcher(needle.begin(), needle.end())) !=
           hay.end();
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
    Runner runner(scenario, options);
    return runner.run();
}

std::vector<std::string> scan_privacy(const RunResult& result) {
    std::vector<std::string> findings;

    // Short identifiers are only searched in their serialized (length-prefixed)
    // form; raw matches of a few bytes would be chance collisions.
    std::vector<std::pair<std::string, Bytes>> patterns;
    for (const auto& [label, secret] : result.secrets) {
        Bytes prefixed{static_cast<std::uint8_t>(secret.size() >> 24), static_cast<std::uint8_t>(secret.size() >> 16),
                       static_cast<std::uint8_t>(secret.size() >> 8), static_cast<std::uint8_t>(secret.size())};
        prefixed.insert(prefixed.end(), secret.begin(), secret.end());
        patterns.emplace_back(label, std::move(prefixed));
        if (secret.size() >= 6) patterns.emplace_back(label, secret);
    }
    auto scan = [&](const std::string& where, const Bytes& hay) {
        for (const auto& [label, needle] : patterns) {
            if (contains(hay, needle)) findings.push_back(label + " found in " + where);
        }
    };
    for (const auto& rec : result.log) {
        scan("ledger entry at height " + std::to_string(rec.height), rec.entry.encode());
    }
    for (std::size_t i = 0; i < result.network.size(); ++i) {
        scan("network message " + std::to_string(i), result.network[i]);
    }
    for (const auto& m : result.transcript) {
        scan(m.kind + " message of " + m.wallet + " (session " + std::to_string(m.session) + ")", m.bytes);
    }

    // Field-equality join across sessions of each wallet. Deliberate replays
    // and retries with returned tokens count as the session they repeat.
    std::map<std::string, std::map<Bytes, std::set<std::size_t>>> seen;
    std::map<std::string, std::map<Bytes, std::string>> field_name;
    for (const auto& m : result.transcript) {
        auto root = m.linked_session != 0 ? m.linked_session : m.session;
        for (const auto& f : m.fields) {
            if (f.shared) continue;
            seen[m.wallet][f.value].insert(root);
            field_name[m.wallet].emplace(f.value, f.name);
        }
    }
    for (const auto& [wallet, values] : seen) {
        for (const auto& [value, sessions] : values) {
            if (sessions.size() > 1) {
                findings.push_back("wallet " + wallet + ": field " + field_name[wallet][value] + " repeats across " +
                                   std::to_string(sessions.size()) + " sessions");
            }
        }
    }
    return findings;
}

}  // namespace cbdc

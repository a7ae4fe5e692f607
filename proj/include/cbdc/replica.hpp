#pragma once

#include "cbdc/genesis.hpp"
#include "cbdc/ledger.hpp"
#include "cbdc/messages.hpp"
#include "cbdc/transport.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cbdc {

struct ReplicaConfig {
    NodeId id = 0;
    /// Non-voting replica: follows commits, executes, never votes.
    bool observer = false;
    /// Entries per PrePrepare.
    std::size_t batch_size = 64;
    /// Proposed but not yet executed batches a leader keeps in flight.
    std::size_t window = 4;
    TimeMs timeout_ms = 500;
    /// Executed batches kept to answer catch-up requests; 0 keeps all.
    std::size_t retained_batches = 0;
    LedgerOptions ledger;
    /// Nodes that receive protocol traffic without voting.
    std::vector<NodeId> observers;
    /// When this returns true and the replica leads, each proposal goes out
    /// as two conflicting PrePrepares. Fault injection only.
    std::function<bool()> equivocating;
};

struct ReplicaStats {
    std::uint64_t invalid_messages = 0;
    std::uint64_t invalid_requests = 0;
    std::uint64_t views_entered = 0;
    std::uint64_t view_changes_sent = 0;
    std::uint64_t fetch_requests = 0;
};

/// One PBFT replica wrapped around a LedgerState. A pure function of the
/// messages and timer callbacks it receives: every output goes through the
/// Transport.
class Replica : public Endpoint {
public:
    using CommitHook = std::function<void(const LogRecord&)>;
    using EvidenceHook = std::function<void(const EquivocationEvidence&)>;

    /// `key` is required unless config.observer is set.
    Replica(std::shared_ptr<const Genesis> genesis, ReplicaConfig config,
            std::optional<SigningKey> key, Transport& transport);

    /// Client path: checks the entry, gossips it to every validator and
    /// queues it for proposal. Returns the stateless verdict.
    Verdict submit(const LedgerEntry& entry);

    /// Leader path: PrePrepares `entries` as the next sequence number.
    /// Throws NotLeader or ValidationFailed (nothing is sent then).
    std::uint64_t propose(std::vector<LedgerEntry> entries);

    void on_message(NodeId from, const SharedBytes& message) override;
    void on_timer(std::uint64_t tag) override;

    void add_commit_hook(CommitHook hook) { commit_hooks_.push_back(std::move(hook)); }
    void set_evidence_hook(EvidenceHook hook) { evidence_hook_ = std::move(hook); }

    NodeId id() const { return config_.id; }
    bool observer() const { return config_.observer; }
    std::uint64_t view() const { return view_; }
    bool in_view_change() const { return in_vc_; }
    NodeId leader() const { return leader_of(*genesis_, view_); }
    bool is_leader() const { return !config_.observer && leader() == config_.id; }
    std::uint64_t last_executed() const { return last_executed_; }
    /// Batch digest executed at `seq` (1-based).
    const Hash256& executed_digest(std::uint64_t seq) const { return executed_digests_.at(seq - 1); }
    const std::vector<Hash256>& executed_digests() const { return executed_digests_; }
    const LedgerState& ledger() const { return ledger_; }
    std::size_t pending() const { return pool_.size(); }
    bool has_executed(const Hash256& entry_hash) const { return executed_entries_.contains(entry_hash); }
    const std::vector<EquivocationEvidence>& evidence() const { return evidence_; }
    /// (view, seq) of every equivocation this replica injected.
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& injected() const { return injected_; }
    const ReplicaStats& stats() const { return stats_; }

private:
    struct Votes {
        std::map<NodeId, Signature> prepares;
        std::map<NodeId, Signature> commits;
    };
    struct Slot {
        std::uint64_t view = 0;
        bool accepted = false;
        Hash256 digest;
        Signature leader_sig;
        bool commit_sent = false;
        std::map<std::pair<std::uint64_t, Hash256>, Votes> votes;
        std::optional<PreparedCert> prepared;
        std::optional<CommitCert> committed;
    };
    struct StoredViewChange {
        ViewChangeMsg msg;
        Bytes envelope;
    };

    void send_to(NodeId to, MessageKind kind, const SharedBytes& bytes);
    void send_validators(MessageKind kind, const SharedBytes& bytes);
    void send_observers(MessageKind kind, const SharedBytes& bytes);
    SharedBytes seal(MessageKind kind, Bytes header, Bytes body = {});

    void handle_request(const Envelope& env);
    void handle_preprepare(const Envelope& env);
    void handle_prepare(const Envelope& env);
    void handle_commit(const Envelope& env);
    void handle_view_change(const Envelope& env);
    void handle_new_view(const Envelope& env);
    void handle_fetch_request(const Envelope& env);
    void handle_fetch_reply(const Envelope& env);

    bool enqueue(const Hash256& hash, const LedgerEntry& entry);
    bool stateless_ok(const Hash256& hash, const LedgerEntry& entry);
    void propose_batch(std::vector<LedgerEntry> entries);
    void maybe_propose();
    void accept_preprepare(std::uint64_t view, std::uint64_t seq, const BatchPtr& batch,
                           const Signature& leader_sig);
    void note_header(std::uint64_t view, std::uint64_t seq, const Hash256& digest,
                     const Signature& sig);
    void note_view(NodeId sender, std::uint64_t view);
    void check_progress(std::uint64_t seq);
    void try_execute();
    void execute(std::uint64_t seq, const CommitCert& cert, const BatchPtr& batch);
    void maybe_fetch();

    void start_view_change(std::uint64_t target);
    void maybe_new_view(std::uint64_t target);
    void enter_view(std::uint64_t view, const ViewPlan& plan, const std::vector<Reproposal>& props);

    void arm_timer(TimeMs duration);
    void disarm_timer();
    void refresh_timer();

    std::shared_ptr<const Genesis> genesis_;
    ReplicaConfig config_;
    std::optional<SigningKey> key_;
    Transport& transport_;
    LedgerState ledger_;
    std::vector<NodeId> validator_peers_;

    std::uint64_t view_ = 0;
    bool in_vc_ = false;
    std::uint64_t vc_target_ = 0;
    std::uint64_t sent_new_view_ = 0;
    Bytes last_new_view_;
    std::uint64_t next_seq_ = 1;
    std::uint64_t last_executed_ = 0;
    std::optional<CommitCert> last_executed_cert_;

    std::map<std::uint64_t, Slot> slots_;
    std::unordered_map<Hash256, BatchPtr, DigestHash> batches_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<Hash256, Signature>> headers_;
    std::set<std::pair<std::uint64_t, std::uint64_t>> evidence_keys_;
    std::map<std::uint64_t, std::map<NodeId, StoredViewChange>> view_changes_;
    std::map<NodeId, std::uint64_t> higher_views_;
    std::map<std::uint64_t, std::pair<CommitCert, BatchPtr>> retained_;

    std::unordered_map<Hash256, LedgerEntry, DigestHash> pool_;
    std::deque<Hash256> pool_order_;
    std::unordered_set<Hash256, DigestHash> inflight_;
    std::unordered_set<Hash256, DigestHash> verified_;
    std::unordered_set<Hash256, DigestHash> executed_entries_;
    std::vector<Hash256> executed_digests_;

    std::uint64_t timer_gen_ = 0;
    bool timer_active_ = false;
    std::optional<TimeMs> last_fetch_;

    std::vector<CommitHook> commit_hooks_;
    EvidenceHook evidence_hook_;
    std::vector<EquivocationEvidence> evidence_;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> injected_;
    ReplicaStats stats_;
};

}  // namespace cbdc

#include "cbdc/replica.hpp"

#include "cbdc/error.hpp"

#include <algorithm>

namespace cbdc {

namespace {

constexpr std::size_t kFetchChunk = 32;
constexpr std::uint64_t kHeaderHistory = 4096;
constexpr unsigned kMaxBackoffShift = 6;

}  // namespace

Replica::Replica(std::shared_ptr<const Genesis> genesis, ReplicaConfig config,
                 std::optional<SigningKey> key, Transport& transport)
    : genesis_(std::move(genesis)),
      config_(std::move(config)),
      key_(std::move(key)),
      transport_(transport),
      ledger_(genesis_, config_.ledger) {
    if (!config_.observer) {
        if (!key_ || genesis_->validator(config_.id) == nullptr) {
            throw Error(Errc::ConfigError, "validator replica needs its genesis key");
        }
        if (key_->verify_key() != genesis_->validator(config_.id)->key) {
            throw Error(Errc::ConfigError, "signing key does not match genesis");
        }
    }
    if (config_.batch_size == 0 || config_.window == 0 || config_.timeout_ms == 0) {
        throw Error(Errc::ConfigError, "batch size, window and timeout must be positive");
    }
    for (const auto& v : genesis_->validators) {
        if (v.id != config_.id) validator_peers_.push_back(v.id);
    }
    batches_[Batch::null_digest()] = Batch::make({});
}

// ---- plumbing -------------------------------------------------------------

void Replica::send_to(NodeId to, MessageKind kind, const SharedBytes& bytes) {
    transport_.send(config_.id, to, to_string(kind), bytes);
}

void Replica::send_validators(MessageKind kind, const SharedBytes& bytes) {
    for (auto peer : validator_peers_) send_to(peer, kind, bytes);
}

void Replica::send_observers(MessageKind kind, const SharedBytes& bytes) {
    for (auto obs : config_.observers) {
        if (obs != config_.id) send_to(obs, kind, bytes);
    }
}

SharedBytes Replica::seal(MessageKind kind, Bytes header, Bytes body) {
    Envelope env;
    env.kind = kind;
    env.sender = config_.id;
    env.header = std::move(header);
    env.body = std::move(body);
    if (key_ && kind != MessageKind::Request && kind != MessageKind::FetchRequest &&
        kind != MessageKind::FetchReply) {
        env.sign(*key_);
    }
    return std::make_shared<const Bytes>(env.encode());
}

void Replica::arm_timer(TimeMs duration) {
    ++timer_gen_;
    timer_active_ = true;
    transport_.set_timer(config_.id, transport_.now() + duration, timer_gen_);
}

void Replica::disarm_timer() {
    ++timer_gen_;
    timer_active_ = false;
}

void Replica::refresh_timer() {
    if (config_.observer || in_vc_) return;
    if (pool_.empty()) {
        disarm_timer();
    } else {
        arm_timer(config_.timeout_ms);
    }
}

void Replica::on_timer(std::uint64_t tag) {
    if (tag != timer_gen_ || !timer_active_) return;
    timer_active_ = false;
    if (config_.observer) return;
    // Lagging behind a live cluster is not a reason to replace the leader.
    for (const auto& [seq, slot] : slots_) {
        if (slot.committed) {
            maybe_fetch();
            arm_timer(config_.timeout_ms);
            return;
        }
    }
    start_view_change(in_vc_ ? vc_target_ + 1 : view_ + 1);
}

void Replica::on_message(NodeId from, const SharedBytes& message) {
    Envelope env;
    try {
        env = Envelope::decode(*message);
    } catch (const Error&) {
        ++stats_.invalid_messages;
        return;
    }
    if (env.sender != from) {
        ++stats_.invalid_messages;
        return;
    }
    const bool signed_kind = env.kind != MessageKind::Request &&
                             env.kind != MessageKind::FetchRequest &&
                             env.kind != MessageKind::FetchReply;
    if (signed_kind) {
        const auto* v = genesis_->validator(env.sender);
        if (v == nullptr || !env.verify(v->key)) {
            ++stats_.invalid_messages;
            return;
        }
    }
    try {
        switch (env.kind) {
            case MessageKind::Request: handle_request(env); break;
            case MessageKind::PrePrepare: handle_preprepare(env); break;
            case MessageKind::Prepare: handle_prepare(env); break;
            case MessageKind::Commit: handle_commit(env); break;
            case MessageKind::ViewChange: handle_view_change(env); break;
            case MessageKind::NewView: handle_new_view(env); break;
            case MessageKind::FetchRequest: handle_fetch_request(env); break;
            case MessageKind::FetchReply: handle_fetch_reply(env); break;
        }
    } catch (const Error& e) {
        if (e.code() != Errc::Malformed) throw;
        ++stats_.invalid_messages;
    }
}

// ---- requests and proposals ------------------------------------------------

bool Replica::stateless_ok(const Hash256& hash, const LedgerEntry& entry) {
    if (verified_.contains(hash)) return true;
    if (!ledger_.validate_stateless(entry).accepted()) return false;
    verified_.insert(hash);
    return true;
}

bool Replica::enqueue(const Hash256& hash, const LedgerEntry& entry) {
    if (executed_entries_.contains(hash) || pool_.contains(hash)) return false;
    if (!stateless_ok(hash, entry)) {
        ++stats_.invalid_requests;
        return false;
    }
    pool_.emplace(hash, entry);
    pool_order_.push_back(hash);
    if (!timer_active_ && !in_vc_) arm_timer(config_.timeout_ms);
    return true;
}

Verdict Replica::submit(const LedgerEntry& entry) {
    if (config_.observer) throw Error(Errc::NotLeader, "observers do not take requests");
    auto verdict = ledger_.validate_stateless(entry);
    if (!verdict.accepted()) return verdict;
    auto bytes = entry.encode();
    auto hash = sha256(bytes);
    verified_.insert(hash);
    if (enqueue(hash, entry)) {
        send_validators(MessageKind::Request, seal(MessageKind::Request, {}, std::move(bytes)));
        maybe_propose();
    }
    return verdict;
}

void Replica::handle_request(const Envelope& env) {
    if (config_.observer) return;
    auto hash = sha256(env.body);
    if (executed_entries_.contains(hash) || pool_.contains(hash)) return;
    auto entry = LedgerEntry::decode(env.body);
    if (enqueue(hash, entry)) maybe_propose();
}

std::uint64_t Replica::propose(std::vector<LedgerEntry> entries) {
    if (!is_leader() || in_vc_) {
        throw Error(Errc::NotLeader, "leader of view " + std::to_string(view_) + " is " +
                                         std::to_string(leader()));
    }
    for (const auto& e : entries) {
        auto v = ledger_.validate_stateless(e);
        if (!v.accepted()) throw Error(Errc::ValidationFailed, v.describe());
    }
    for (const auto& e : entries) verified_.insert(e.hash());
    auto seq = std::max(next_seq_, last_executed_ + 1);
    propose_batch(std::move(entries));
    return seq;
}

void Replica::maybe_propose() {
    if (!is_leader() || in_vc_) return;
    next_seq_ = std::max(next_seq_, last_executed_ + 1);
    while (next_seq_ - 1 - last_executed_ < config_.window) {
        std::vector<LedgerEntry> entries;
        while (!pool_order_.empty() && entries.size() < config_.batch_size) {
            auto hash = pool_order_.front();
            pool_order_.pop_front();
            auto it = pool_.find(hash);
            if (it == pool_.end() || inflight_.contains(hash)) continue;
            entries.push_back(it->second);
        }
        if (entries.empty()) return;
        propose_batch(std::move(entries));
    }
}

void Replica::propose_batch(std::vector<LedgerEntry> entries) {
    next_seq_ = std::max(next_seq_, last_executed_ + 1);
    const auto seq = next_seq_++;
    auto batch = Batch::make(std::move(entries));
    for (const auto& h : batch->entry_hashes) inflight_.insert(h);
    auto pp = seal(MessageKind::PrePrepare, slot_header(view_, seq, batch->digest), batch->encoded);
    const auto sig = Envelope::decode(*pp).signature;

    if (config_.equivocating && config_.equivocating()) {
        // Conflicting batch for the second half of the peers.
        std::vector<LedgerEntry> alt_entries(batch->entries.begin(), batch->entries.end());
        if (!alt_entries.empty()) alt_entries.pop_back();
        auto alt = Batch::make(std::move(alt_entries));
        auto alt_pp = seal(MessageKind::PrePrepare, slot_header(view_, seq, alt->digest), alt->encoded);
        const auto alt_sig = Envelope::decode(*alt_pp).signature;
        auto prep_a = seal(MessageKind::Prepare, prepare_header(view_, seq, batch->digest, sig));
        auto prep_b = seal(MessageKind::Prepare, prepare_header(view_, seq, alt->digest, alt_sig));
        const auto half = (validator_peers_.size() + 1) / 2;
        for (std::size_t i = 0; i < validator_peers_.size(); ++i) {
            const bool first = i < half;
            send_to(validator_peers_[i], MessageKind::PrePrepare, first ? pp : alt_pp);
            send_to(validator_peers_[i], MessageKind::Prepare, first ? prep_a : prep_b);
        }
        send_observers(MessageKind::PrePrepare, pp);
        injected_.emplace_back(view_, seq);
        batches_[batch->digest] = batch;
        auto& slot = slots_[seq];
        slot.view = view_;
        slot.accepted = true;
        slot.digest = batch->digest;
        slot.leader_sig = sig;
        slot.votes[{view_, batch->digest}].prepares[config_.id] = Envelope::decode(*prep_a).signature;
        return;
    }

    send_validators(MessageKind::PrePrepare, pp);
    send_observers(MessageKind::PrePrepare, pp);
    accept_preprepare(view_, seq, batch, sig);
}

// ---- normal case ----------------------------------------------------------

void Replica::note_header(std::uint64_t view, std::uint64_t seq, const Hash256& digest,
                          const Signature& sig) {
    auto [it, inserted] = headers_.try_emplace({view, seq}, digest, sig);
    if (inserted || it->second.first == digest) return;
    auto leader = leader_of(*genesis_, view);
    if (!evidence_keys_.insert({view, seq}).second) return;
    EquivocationEvidence ev{leader, view, seq, it->second.first, it->second.second, digest, sig};
    evidence_.push_back(ev);
    if (evidence_hook_) evidence_hook_(ev);
}

void Replica::note_view(NodeId sender, std::uint64_t view) {
    if (config_.observer || view <= view_) return;
    auto& seen = higher_views_[sender];
    seen = std::max(seen, view);
    std::size_t ahead = 0;
    for (const auto& [id, v] : higher_views_) {
        if (v > view_) ++ahead;
    }
    if (ahead >= genesis_->max_faulty() + 1 && !in_vc_) maybe_fetch();
}

void Replica::handle_preprepare(const Envelope& env) {
    Reader r(env.header);
    auto h = read_slot_header(r);
    r.expect_done();
    if (env.sender != leader_of(*genesis_, h.view)) {
        ++stats_.invalid_messages;
        return;
    }
    auto batch = Batch::decode(env.body);
    if (batch->digest != h.digest) {
        ++stats_.invalid_messages;
        return;
    }
    note_header(h.view, h.seq, h.digest, env.signature);
    note_view(env.sender, h.view);
    if (h.seq <= last_executed_) return;
    batches_.try_emplace(h.digest, batch);
    if (config_.observer) {
        check_progress(h.seq);
        return;
    }
    if (h.view != view_ || in_vc_) return;
    auto& slot = slots_[h.seq];
    if (slot.accepted && slot.view == h.view) return;
    for (std::size_t i = 0; i < batch->entries.size(); ++i) {
        if (!stateless_ok(batch->entry_hashes[i], batch->entries[i])) {
            ++stats_.invalid_messages;
            return;
        }
    }
    accept_preprepare(h.view, h.seq, batch, env.signature);
}

void Replica::accept_preprepare(std::uint64_t view, std::uint64_t seq, const BatchPtr& batch,
                                const Signature& leader_sig) {
    batches_.try_emplace(batch->digest, batch);
    note_header(view, seq, batch->digest, leader_sig);
    auto& slot = slots_[seq];
    slot.view = view;
    slot.accepted = true;
    slot.digest = batch->digest;
    slot.leader_sig = leader_sig;
    slot.commit_sent = false;
    auto prep = seal(MessageKind::Prepare, prepare_header(view, seq, batch->digest, leader_sig));
    slot.votes[{view, batch->digest}].prepares[config_.id] = Envelope::decode(*prep).signature;
    send_validators(MessageKind::Prepare, prep);
    check_progress(seq);
}

void Replica::handle_prepare(const Envelope& env) {
    if (config_.observer) return;
    Reader r(env.header);
    auto h = read_slot_header(r);
    Signature leader_sig;
    auto raw = r.raw(64);
    std::copy(raw.begin(), raw.end(), leader_sig.bytes.begin());
    r.expect_done();
    note_view(env.sender, h.view);
    auto known = headers_.find({h.view, h.seq});
    const bool cached = known != headers_.end() && known->second.first == h.digest &&
                        known->second.second == leader_sig;
    if (!cached && !verify_leader_header(*genesis_, h.view, h.seq, h.digest, leader_sig)) {
        ++stats_.invalid_messages;
        return;
    }
    if (h.seq + kHeaderHistory > last_executed_) note_header(h.view, h.seq, h.digest, leader_sig);
    if (h.seq <= last_executed_) return;
    slots_[h.seq].votes[{h.view, h.digest}].prepares[env.sender] = env.signature;
    check_progress(h.seq);
}

void Replica::handle_commit(const Envelope& env) {
    Reader r(env.header);
    auto h = read_slot_header(r);
    r.expect_done();
    note_view(env.sender, h.view);
    if (h.seq <= last_executed_) return;
    slots_[h.seq].votes[{h.view, h.digest}].commits[env.sender] = env.signature;
    check_progress(h.seq);
}

void Replica::check_progress(std::uint64_t seq) {
    auto it = slots_.find(seq);
    if (it == slots_.end()) return;
    auto& slot = it->second;
    const auto quorum = genesis_->quorum();

    if (!config_.observer && slot.accepted && !slot.commit_sent && slot.view == view_ && !in_vc_) {
        auto& votes = slot.votes[{slot.view, slot.digest}];
        auto batch = batches_.find(slot.digest);
        if (votes.prepares.size() >= quorum && batch != batches_.end()) {
            slot.prepared = PreparedCert{slot.view, seq,       slot.digest, slot.leader_sig,
                                         votes.prepares, batch->second};
            slot.commit_sent = true;
            auto commit = seal(MessageKind::Commit, slot_header(slot.view, seq, slot.digest));
            votes.commits[config_.id] = Envelope::decode(*commit).signature;
            send_validators(MessageKind::Commit, commit);
            send_observers(MessageKind::Commit, commit);
        }
    }
    if (!slot.committed) {
        for (const auto& [key, votes] : slot.votes) {
            if (votes.commits.size() >= quorum) {
                slot.committed = CommitCert{key.first, seq, key.second, votes.commits};
                break;
            }
        }
    }
    if (slot.committed) try_execute();
}

void Replica::try_execute() {
    bool progressed = false;
    while (true) {
        auto it = slots_.find(last_executed_ + 1);
        if (it == slots_.end() || !it->second.committed) break;
        auto cert = *it->second.committed;
        auto b = batches_.find(cert.digest);
        if (b == batches_.end()) {
            maybe_fetch();
            break;
        }
        auto batch = b->second;
        execute(it->first, cert, batch);
        progressed = true;
    }
    // Pipelined slots may commit out of order; one committed beyond the
    // leader's window means we missed something.
    auto ahead = slots_.upper_bound(last_executed_ + config_.window);
    for (; ahead != slots_.end(); ++ahead) {
        if (ahead->second.committed) {
            maybe_fetch();
            break;
        }
    }
    if (!progressed) return;
    refresh_timer();
    maybe_propose();
}

void Replica::execute(std::uint64_t seq, const CommitCert& cert, const BatchPtr& batch) {
    for (std::size_t i = 0; i < batch->entries.size(); ++i) {
        const auto& hash = batch->entry_hashes[i];
        if (!executed_entries_.insert(hash).second) continue;
        const bool checked = verified_.erase(hash) > 0;
        const auto& rec = ledger_.execute(batch->entries[i], checked);
        if (pool_.erase(hash) == 0) {
            // Never queued here; nothing to clean up.
        }
        inflight_.erase(hash);
        for (const auto& hook : commit_hooks_) hook(rec);
    }
    executed_digests_.push_back(batch->digest);
    last_executed_ = seq;
    last_executed_cert_ = cert;
    slots_.erase(seq);
    // The same batch can sit at two sequence numbers after a view change.
    const bool shared = batch->digest == Batch::null_digest() ||
                        std::any_of(slots_.begin(), slots_.end(), [&](const auto& kv) {
                            return kv.second.accepted && kv.second.digest == batch->digest;
                        });
    if (!shared) batches_.erase(batch->digest);
    retained_.emplace(seq, std::make_pair(cert, batch));
    if (config_.retained_batches > 0) {
        while (retained_.size() > config_.retained_batches) retained_.erase(retained_.begin());
    }
    while (!headers_.empty() && headers_.begin()->first.second + kHeaderHistory < seq) {
        headers_.erase(headers_.begin());
    }
    if (pool_order_.size() > 2 * pool_.size() + 64) {
        std::deque<Hash256> kept;
        for (const auto& h : pool_order_) {
            if (pool_.contains(h)) kept.push_back(h);
        }
        pool_order_.swap(kept);
    }
}

// ---- catch-up -------------------------------------------------------------

void Replica::maybe_fetch() {
    auto now = transport_.now();
    if (last_fetch_ && now < *last_fetch_ + config_.timeout_ms / 2) return;
    last_fetch_ = now;
    ++stats_.fetch_requests;
    Writer w;
    w.u64(last_executed_ + 1);
    auto msg = seal(MessageKind::FetchRequest, w.take());
    send_validators(MessageKind::FetchRequest, msg);
}

void Replica::handle_fetch_request(const Envelope& env) {
    Reader r(env.header);
    auto from = r.u64();
    r.expect_done();
    FetchReplyMsg reply;
    if (!last_new_view_.empty()) reply.new_view = last_new_view_;
    for (auto it = retained_.lower_bound(from); it != retained_.end() && reply.items.size() < kFetchChunk;
         ++it) {
        reply.items.push_back(it->second);
    }
    // Committed here but not yet executed.
    for (auto it = slots_.lower_bound(from); it != slots_.end() && reply.items.size() < kFetchChunk;
         ++it) {
        if (!it->second.committed) continue;
        auto b = batches_.find(it->second.committed->digest);
        if (b != batches_.end()) reply.items.emplace_back(*it->second.committed, b->second);
    }
    if (reply.items.empty() && !reply.new_view) return;
    send_to(env.sender, MessageKind::FetchReply, seal(MessageKind::FetchReply, reply.encode_header()));
}

void Replica::handle_fetch_reply(const Envelope& env) {
    auto reply = FetchReplyMsg::decode_header(env.header);
    if (reply.new_view && !config_.observer) {
        auto nv = Envelope::decode(*reply.new_view);
        const auto* v = genesis_->validator(nv.sender);
        if (nv.kind == MessageKind::NewView && v != nullptr && nv.verify(v->key)) {
            handle_new_view(nv);
        }
    }
    bool any = false;
    for (const auto& [cert, batch] : reply.items) {
        if (cert.seq <= last_executed_) continue;
        if (batch->digest != cert.digest || !cert.verify(*genesis_)) {
            ++stats_.invalid_messages;
            continue;
        }
        auto& slot = slots_[cert.seq];
        if (!slot.committed) slot.committed = cert;
        batches_.try_emplace(cert.digest, batch);
        any = true;
    }
    if (any) try_execute();
}

// ---- view change ----------------------------------------------------------

void Replica::start_view_change(std::uint64_t target) {
    if (config_.observer || target <= view_) return;
    if (in_vc_ && target <= vc_target_) return;
    in_vc_ = true;
    vc_target_ = target;
    ++stats_.view_changes_sent;

    ViewChangeMsg msg;
    msg.new_view = target;
    msg.last_executed = last_executed_;
    msg.executed_proof = last_executed_cert_;
    for (const auto& [seq, slot] : slots_) {
        if (seq > last_executed_ && slot.prepared) msg.prepared.push_back(*slot.prepared);
    }
    auto bytes = seal(MessageKind::ViewChange, msg.encode_header());
    view_changes_[target][config_.id] = StoredViewChange{std::move(msg), *bytes};
    send_validators(MessageKind::ViewChange, bytes);

    auto shift = std::min<std::uint64_t>(target - view_ - 1, kMaxBackoffShift);
    arm_timer(config_.timeout_ms << shift);
    maybe_new_view(target);
}

void Replica::handle_view_change(const Envelope& env) {
    if (config_.observer) return;
    auto msg = ViewChangeMsg::decode_header(env.header);
    if (msg.new_view <= view_) return;
    if (!msg.verify(*genesis_)) {
        ++stats_.invalid_messages;
        return;
    }
    const auto target = msg.new_view;
    view_changes_[target][env.sender] = StoredViewChange{std::move(msg), env.encode()};

    // Join once f + 1 others are already moving past our target.
    const auto floor = in_vc_ ? vc_target_ : view_;
    std::map<NodeId, std::uint64_t> lowest;
    for (const auto& [t, senders] : view_changes_) {
        if (t <= floor) continue;
        for (const auto& [id, _] : senders) {
            if (id != config_.id) lowest.try_emplace(id, t);
        }
    }
    if (lowest.size() >= genesis_->max_faulty() + 1) {
        std::uint64_t join = UINT64_MAX;
        for (const auto& [id, t] : lowest) join = std::min(join, t);
        start_view_change(join);
    }
    maybe_new_view(target);
}

void Replica::maybe_new_view(std::uint64_t target) {
    if (!in_vc_ || vc_target_ != target || leader_of(*genesis_, target) != config_.id) return;
    if (sent_new_view_ >= target) return;
    auto it = view_changes_.find(target);
    if (it == view_changes_.end() || it->second.size() < genesis_->quorum()) return;

    NewViewMsg nv;
    nv.view = target;
    std::vector<ViewChangeMsg> used;
    // Own view change first, then others by id.
    used.push_back(it->second.at(config_.id).msg);
    nv.view_changes.push_back(it->second.at(config_.id).envelope);
    for (const auto& [id, stored] : it->second) {
        if (used.size() >= genesis_->quorum()) break;
        if (id == config_.id) continue;
        used.push_back(stored.msg);
        nv.view_changes.push_back(stored.envelope);
    }
    auto plan = plan_new_view(used);
    for (const auto& [seq, batch] : plan.slots) {
        auto header = slot_header(target, seq, batch->digest);
        auto sig = key_->sign(Envelope::signing_bytes(MessageKind::PrePrepare, config_.id, header));
        nv.reproposals.push_back({seq, batch->digest, sig});
    }
    sent_new_view_ = target;
    auto bytes = seal(MessageKind::NewView, nv.encode_header());
    last_new_view_ = *bytes;
    send_validators(MessageKind::NewView, bytes);
    send_observers(MessageKind::NewView, bytes);
    enter_view(target, plan, nv.reproposals);
}

void Replica::handle_new_view(const Envelope& env) {
    auto nv = NewViewMsg::decode_header(env.header);
    if (nv.view <= view_) return;
    if (env.sender != leader_of(*genesis_, nv.view)) {
        ++stats_.invalid_messages;
        return;
    }
    std::vector<ViewChangeMsg> vcs;
    std::set<NodeId> senders;
    for (const auto& raw : nv.view_changes) {
        auto vc_env = Envelope::decode(raw);
        const auto* v = genesis_->validator(vc_env.sender);
        if (vc_env.kind != MessageKind::ViewChange || v == nullptr || !vc_env.verify(v->key) ||
            !senders.insert(vc_env.sender).second) {
            ++stats_.invalid_messages;
            return;
        }
        auto vc = ViewChangeMsg::decode_header(vc_env.header);
        if (vc.new_view != nv.view || !vc.verify(*genesis_)) {
            ++stats_.invalid_messages;
            return;
        }
        vcs.push_back(std::move(vc));
    }
    if (vcs.size() < genesis_->quorum()) {
        ++stats_.invalid_messages;
        return;
    }
    auto plan = plan_new_view(vcs);
    if (plan.slots.size() != nv.reproposals.size()) {
        ++stats_.invalid_messages;
        return;
    }
    for (std::size_t i = 0; i < plan.slots.size(); ++i) {
        const auto& p = nv.reproposals[i];
        if (p.seq != plan.slots[i].first || p.digest != plan.slots[i].second->digest ||
            !verify_leader_header(*genesis_, nv.view, p.seq, p.digest, p.leader_sig)) {
            ++stats_.invalid_messages;
            return;
        }
    }
    last_new_view_ = env.encode();
    if (config_.observer) {
        view_ = nv.view;
        for (const auto& [seq, batch] : plan.slots) {
            if (seq > last_executed_) batches_.try_emplace(batch->digest, batch);
        }
        for (const auto& p : nv.reproposals) note_header(nv.view, p.seq, p.digest, p.leader_sig);
        try_execute();
        return;
    }
    enter_view(nv.view, plan, nv.reproposals);
}

void Replica::enter_view(std::uint64_t view, const ViewPlan& plan,
                         const std::vector<Reproposal>& props) {
    view_ = view;
    in_vc_ = false;
    vc_target_ = view;
    ++stats_.views_entered;
    view_changes_.erase(view_changes_.begin(), view_changes_.upper_bound(view));
    for (auto it = higher_views_.begin(); it != higher_views_.end();) {
        it = it->second <= view ? higher_views_.erase(it) : std::next(it);
    }
    for (auto& [seq, slot] : slots_) {
        slot.accepted = false;
        slot.commit_sent = false;
    }
    inflight_.clear();

    std::uint64_t high = plan.low;
    for (std::size_t i = 0; i < plan.slots.size(); ++i) {
        const auto& [seq, batch] = plan.slots[i];
        high = std::max(high, seq);
        if (seq <= last_executed_) continue;
        for (const auto& h : batch->entry_hashes) inflight_.insert(h);
        accept_preprepare(view, seq, batch, props[i].leader_sig);
    }
    next_seq_ = std::max(high, last_executed_) + 1;
    if (plan.low > last_executed_) maybe_fetch();

    // Votes for this view may have arrived before the NewView.
    std::vector<std::uint64_t> seqs;
    for (const auto& [seq, _] : slots_) seqs.push_back(seq);
    for (auto seq : seqs) check_progress(seq);

    refresh_timer();
    maybe_propose();
}

}  // namespace cbdc

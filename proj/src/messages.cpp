#include "cbdc/messages.hpp"

#include "cbdc/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace cbdc {

namespace {

void write_sigs(Writer& w, const std::map<NodeId, Signature>& sigs) {
    w.u32(static_cast<std::uint32_t>(sigs.size()));
    for (const auto& [id, sig] : sigs) {
        w.u32(id).raw(sig.view());
    }
}

Signature read_sig(Reader& r) {
    Signature s;
    auto raw = r.raw(64);
    std::copy(raw.begin(), raw.end(), s.bytes.begin());
    return s;
}

std::map<NodeId, Signature> read_sigs(Reader& r) {
    std::map<NodeId, Signature> out;
    auto n = r.count(68);
    for (std::uint32_t i = 0; i < n; ++i) {
        auto id = r.u32();
        out[id] = read_sig(r);
    }
    return out;
}

std::size_t count_valid(const Genesis& g, MessageKind kind, const Bytes& header,
                        const std::map<NodeId, Signature>& sigs) {
    std::size_t ok = 0;
    for (const auto& [id, sig] : sigs) {
        const auto* v = g.validator(id);
        if (v != nullptr && verify_signature(v->key, Envelope::signing_bytes(kind, id, header), sig)) {
            ++ok;
        }
    }
    return ok;
}

Signature sig_from_hex(const std::string& hex) {
    auto bytes = from_hex(hex);
    if (bytes.size() != 64) throw Error(Errc::Malformed, "signature length");
    Signature s;
    std::copy(bytes.begin(), bytes.end(), s.bytes.begin());
    return s;
}

}  // namespace

std::string_view to_string(MessageKind k) noexcept {
    switch (k) {
        case MessageKind::Request: return "Request";
        case MessageKind::PrePrepare: return "PrePrepare";
        case MessageKind::Prepare: return "Prepare";
        case MessageKind::Commit: return "Commit";
        case MessageKind::ViewChange: return "ViewChange";
        case MessageKind::NewView: return "NewView";
        case MessageKind::FetchRequest: return "FetchRequest";
        case MessageKind::FetchReply: return "FetchReply";
    }
    return "Unknown";
}

std::shared_ptr<const Batch> Batch::make(std::vector<LedgerEntry> entries) {
    auto b = std::make_shared<Batch>();
    Writer w;
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        auto bytes = e.encode();
        b->entry_hashes.push_back(sha256(bytes));
        w.raw(bytes);
    }
    b->entries = std::move(entries);
    b->encoded = w.take();
    b->digest = sha256(b->encoded);
    return b;
}

std::shared_ptr<const Batch> Batch::decode(ByteView bytes) {
    Reader r(bytes);
    auto n = r.count(100);
    std::vector<LedgerEntry> entries;
    entries.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        entries.push_back(LedgerEntry::read(r));
    }
    r.expect_done();
    auto b = make(std::move(entries));
    if (!std::equal(b->encoded.begin(), b->encoded.end(), bytes.begin(), bytes.end())) {
        throw Error(Errc::Malformed, "non-canonical batch");
    }
    return b;
}

const Hash256& Batch::null_digest() {
    static const Hash256 d = make({})->digest;
    return d;
}

Bytes Envelope::signing_bytes(MessageKind kind, NodeId sender, ByteView header) {
    Writer w;
    w.str("cbdc/msg/v1").u8(static_cast<std::uint8_t>(kind)).u32(sender).bytes(header);
    return w.take();
}

Bytes Envelope::encode() const {
    Writer w;
    w.u8(static_cast<std::uint8_t>(kind)).u32(sender).bytes(header).bytes(body).raw(signature.view());
    return w.take();
}

Envelope Envelope::decode(ByteView bytes) {
    Reader r(bytes);
    Envelope e;
    auto k = r.u8();
    if (k < 1 || k > static_cast<std::uint8_t>(MessageKind::FetchReply)) {
        throw Error(Errc::Malformed, "message kind");
    }
    e.kind = static_cast<MessageKind>(k);
    e.sender = r.u32();
    e.header = r.bytes();
    e.body = r.bytes();
    e.signature = read_sig(r);
    r.expect_done();
    return e;
}

void Envelope::sign(const SigningKey& key) {
    signature = key.sign(signing_bytes(kind, sender, header));
}

bool Envelope::verify(const VerifyKey& key) const {
    return verify_signature(key, signing_bytes(kind, sender, header), signature);
}

Bytes slot_header(std::uint64_t view, std::uint64_t seq, const Hash256& digest) {
    Writer w;
    w.u64(view).u64(seq).digest(digest);
    return w.take();
}

Bytes prepare_header(std::uint64_t view, std::uint64_t seq, const Hash256& digest,
                     const Signature& leader_sig) {
    Writer w;
    w.u64(view).u64(seq).digest(digest).raw(leader_sig.view());
    return w.take();
}

SlotHeader read_slot_header(Reader& r) {
    SlotHeader h;
    h.view = r.u64();
    h.seq = r.u64();
    h.digest = r.digest<HashTag>();
    return h;
}

NodeId leader_of(const Genesis& g, std::uint64_t view) {
    return g.validators.at(view % g.validators.size()).id;
}

bool verify_leader_header(const Genesis& g, std::uint64_t view, std::uint64_t seq,
                          const Hash256& digest, const Signature& sig) {
    auto leader = leader_of(g, view);
    return verify_signature(g.validator(leader)->key,
                            Envelope::signing_bytes(MessageKind::PrePrepare, leader,
                                                    slot_header(view, seq, digest)),
                            sig);
}

void CommitCert::write(Writer& w) const {
    w.u64(view).u64(seq).digest(digest);
    write_sigs(w, commits);
}

CommitCert CommitCert::read(Reader& r) {
    CommitCert c;
    c.view = r.u64();
    c.seq = r.u64();
    c.digest = r.digest<HashTag>();
    c.commits = read_sigs(r);
    return c;
}

bool CommitCert::verify(const Genesis& g) const {
    return count_valid(g, MessageKind::Commit, slot_header(view, seq, digest), commits) >= g.quorum();
}

void PreparedCert::write(Writer& w) const {
    w.u64(view).u64(seq).digest(digest).raw(leader_sig.view());
    write_sigs(w, prepares);
    w.bytes(batch->encoded);
}

PreparedCert PreparedCert::read(Reader& r) {
    PreparedCert c;
    c.view = r.u64();
    c.seq = r.u64();
    c.digest = r.digest<HashTag>();
    c.leader_sig = read_sig(r);
    c.prepares = read_sigs(r);
    c.batch = Batch::decode(r.bytes());
    return c;
}

bool PreparedCert::verify(const Genesis& g) const {
    if (!batch || batch->digest != digest) return false;
    if (!verify_leader_header(g, view, seq, digest, leader_sig)) return false;
    return count_valid(g, MessageKind::Prepare, prepare_header(view, seq, digest, leader_sig),
                       prepares) >= g.quorum();
}

Bytes ViewChangeMsg::encode_header() const {
    Writer w;
    w.u64(new_view).u64(last_executed).boolean(executed_proof.has_value());
    if (executed_proof) executed_proof->write(w);
    w.u32(static_cast<std::uint32_t>(prepared.size()));
    for (const auto& c : prepared) c.write(w);
    return w.take();
}

ViewChangeMsg ViewChangeMsg::decode_header(ByteView header) {
    Reader r(header);
    ViewChangeMsg m;
    m.new_view = r.u64();
    m.last_executed = r.u64();
    if (r.boolean()) m.executed_proof = CommitCert::read(r);
    auto n = r.count(100);
    for (std::uint32_t i = 0; i < n; ++i) m.prepared.push_back(PreparedCert::read(r));
    r.expect_done();
    return m;
}

bool ViewChangeMsg::verify(const Genesis& g) const {
    if (last_executed > 0) {
        if (!executed_proof || executed_proof->seq != last_executed || !executed_proof->verify(g)) {
            return false;
        }
    } else if (executed_proof) {
        return false;
    }
    std::set<std::uint64_t> seqs;
    for (const auto& c : prepared) {
        if (c.seq <= last_executed || c.view >= new_view || !seqs.insert(c.seq).second) return false;
        if (!c.verify(g)) return false;
    }
    return true;
}

Bytes NewViewMsg::encode_header() const {
    Writer w;
    w.u64(view);
    w.u32(static_cast<std::uint32_t>(view_changes.size()));
    for (const auto& vc : view_changes) w.bytes(vc);
    w.u32(static_cast<std::uint32_t>(reproposals.size()));
    for (const auto& p : reproposals) w.u64(p.seq).digest(p.digest).raw(p.leader_sig.view());
    return w.take();
}

NewViewMsg NewViewMsg::decode_header(ByteView header) {
    Reader r(header);
    NewViewMsg m;
    m.view = r.u64();
    auto n = r.count(4);
    for (std::uint32_t i = 0; i < n; ++i) m.view_changes.push_back(r.bytes());
    auto k = r.count(104);
    for (std::uint32_t i = 0; i < k; ++i) {
        Reproposal p;
        p.seq = r.u64();
        p.digest = r.digest<HashTag>();
        p.leader_sig = read_sig(r);
        m.reproposals.push_back(p);
    }
    r.expect_done();
    return m;
}

ViewPlan plan_new_view(const std::vector<ViewChangeMsg>& vcs) {
    ViewPlan plan;
    for (const auto& vc : vcs) plan.low = std::max(plan.low, vc.last_executed);
    std::map<std::uint64_t, const PreparedCert*> best;
    for (const auto& vc : vcs) {
        for (const auto& c : vc.prepared) {
            if (c.seq <= plan.low) continue;
            auto& slot = best[c.seq];
            if (slot == nullptr || c.view > slot->view) slot = &c;
        }
    }
    auto high = best.empty() ? plan.low : best.rbegin()->first;
    static const BatchPtr null_batch = Batch::make({});
    for (auto seq = plan.low + 1; seq <= high; ++seq) {
        auto it = best.find(seq);
        plan.slots.emplace_back(seq, it == best.end() ? null_batch : it->second->batch);
    }
    return plan;
}

Bytes FetchReplyMsg::encode_header() const {
    Writer w;
    w.boolean(new_view.has_value());
    if (new_view) w.bytes(*new_view);
    w.u32(static_cast<std::uint32_t>(items.size()));
    for (const auto& [cert, batch] : items) {
        cert.write(w);
        w.bytes(batch->encoded);
    }
    return w.take();
}

FetchReplyMsg FetchReplyMsg::decode_header(ByteView header) {
    Reader r(header);
    FetchReplyMsg m;
    if (r.boolean()) m.new_view = r.bytes();
    auto n = r.count(60);
    for (std::uint32_t i = 0; i < n; ++i) {
        auto cert = CommitCert::read(r);
        auto batch = Batch::decode(r.bytes());
        m.items.emplace_back(std::move(cert), std::move(batch));
    }
    r.expect_done();
    return m;
}

bool EquivocationEvidence::verify(const Genesis& g) const {
    return digest_a != digest_b && leader_of(g, view) == equivocator &&
           verify_leader_header(g, view, seq, digest_a, sig_a) &&
           verify_leader_header(g, view, seq, digest_b, sig_b);
}

std::string EquivocationEvidence::to_json() const {
    nlohmann::json j{
        {"type", "equivocation"},
        {"equivocator", equivocator},
        {"view", view},
        {"seq", seq},
        {"digest_a", digest_a.hex()},
        {"sig_a", to_hex(sig_a.view())},
        {"digest_b", digest_b.hex()},
        {"sig_b", to_hex(sig_b.view())},
    };
    return j.dump();
}

EquivocationEvidence EquivocationEvidence::from_json(std::string_view line) {
    try {
        auto j = nlohmann::json::parse(line);
        EquivocationEvidence e;
        e.equivocator = j.at("equivocator").get<NodeId>();
        e.view = j.at("view").get<std::uint64_t>();
        e.seq = j.at("seq").get<std::uint64_t>();
        e.digest_a = Hash256::from_hex_string(j.at("digest_a").get<std::string>());
        e.sig_a = sig_from_hex(j.at("sig_a").get<std::string>());
        e.digest_b = Hash256::from_hex_string(j.at("digest_b").get<std::string>());
        e.sig_b = sig_from_hex(j.at("sig_b").get<std::string>());
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(Errc::Malformed, ex.what());
    }
}

}  // namespace cbdc

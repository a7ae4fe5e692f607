#pragma once

#include "cbdc/bytes.hpp"
#include "cbdc/crypto.hpp"
#include "cbdc/genesis.hpp"
#include "cbdc/ledger.hpp"
#include "cbdc/serialize.hpp"
#include "cbdc/types.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cbdc {

enum class MessageKind : std::uint8_t {
    Request = 1,
    PrePrepare,
    Prepare,
    Commit,
    ViewChange,
    NewView,
    FetchRequest,
    FetchReply,
};

std::string_view to_string(MessageKind k) noexcept;

/// An ordered group of entries agreed on as one sequence number. The digest
/// is SHA-256 over the encoded batch.
struct Batch {
    std::vector<LedgerEntry> entries;
    std::vector<Hash256> entry_hashes;
    Bytes encoded;
    Hash256 digest;

    static std::shared_ptr<const Batch> make(std::vector<LedgerEntry> entries);
    static std::shared_ptr<const Batch> decode(ByteView bytes);
    static const Hash256& null_digest();
};

using BatchPtr = std::shared_ptr<const Batch>;

/// Signed wire envelope. The signature covers kind, sender and header; the
/// body is bound through a digest inside the header where that matters.
/// Requests are unsigned because the entry carries its submitter signature.
struct Envelope {
    MessageKind kind = MessageKind::Request;
    NodeId sender = 0;
    Bytes header;
    Bytes body;
    Signature signature;

    static Bytes signing_bytes(MessageKind kind, NodeId sender, ByteView header);
    Bytes encode() const;
    static Envelope decode(ByteView bytes);
    void sign(const SigningKey& key);
    bool verify(const VerifyKey& key) const;
};

/// (view, seq, digest): the header of PrePrepare and Commit.
Bytes slot_header(std::uint64_t view, std::uint64_t seq, const Hash256& digest);
/// The Prepare header additionally repeats the leader's PrePrepare signature,
/// so any replica holding two of them for one slot holds evidence.
Bytes prepare_header(std::uint64_t view, std::uint64_t seq, const Hash256& digest,
                     const Signature& leader_sig);

struct SlotHeader {
    std::uint64_t view = 0;
    std::uint64_t seq = 0;
    Hash256 digest;
};

SlotHeader read_slot_header(Reader& r);

/// The leader (view mod N) signed (view, seq, digest) as a PrePrepare.
bool verify_leader_header(const Genesis& g, std::uint64_t view, std::uint64_t seq,
                          const Hash256& digest, const Signature& sig);

NodeId leader_of(const Genesis& g, std::uint64_t view);

/// Quorum of Commit signatures for one slot.
struct CommitCert {
    std::uint64_t view = 0;
    std::uint64_t seq = 0;
    Hash256 digest;
    std::map<NodeId, Signature> commits;

    void write(Writer& w) const;
    static CommitCert read(Reader& r);
    bool verify(const Genesis& g) const;
};

/// PrePrepare plus a quorum of Prepares, with the batch itself so a new
/// leader can re-propose it.
struct PreparedCert {
    std::uint64_t view = 0;
    std::uint64_t seq = 0;
    Hash256 digest;
    Signature leader_sig;
    std::map<NodeId, Signature> prepares;
    BatchPtr batch;

    void write(Writer& w) const;
    static PreparedCert read(Reader& r);
    bool verify(const Genesis& g) const;
};

struct ViewChangeMsg {
    std::uint64_t new_view = 0;
    std::uint64_t last_executed = 0;
    /// Proof for last_executed; absent when nothing has executed.
    std::optional<CommitCert> executed_proof;
    std::vector<PreparedCert> prepared;

    Bytes encode_header() const;
    static ViewChangeMsg decode_header(ByteView header);
    bool verify(const Genesis& g) const;
};

struct Reproposal {
    std::uint64_t seq = 0;
    Hash256 digest;
    Signature leader_sig;
};

struct NewViewMsg {
    std::uint64_t view = 0;
    /// Encoded, signed ViewChange envelopes from a quorum of validators.
    std::vector<Bytes> view_changes;
    std::vector<Reproposal> reproposals;

    Bytes encode_header() const;
    static NewViewMsg decode_header(ByteView header);
};

/// Re-proposal plan derived from a quorum of view changes: everything above
/// the highest proven execution point, highest-view prepared batch per
/// sequence, null batches for gaps.
struct ViewPlan {
    std::uint64_t low = 0;
    std::vector<std::pair<std::uint64_t, BatchPtr>> slots;
};

ViewPlan plan_new_view(const std::vector<ViewChangeMsg>& vcs);

struct FetchReplyMsg {
    std::optional<Bytes> new_view;
    std::vector<std::pair<CommitCert, BatchPtr>> items;

    Bytes encode_header() const;
    static FetchReplyMsg decode_header(ByteView header);
};

/// Two PrePrepare headers signed by one leader for the same (view, seq).
struct EquivocationEvidence {
    NodeId equivocator = 0;
    std::uint64_t view = 0;
    std::uint64_t seq = 0;
    Hash256 digest_a;
    Signature sig_a;
    Hash256 digest_b;
    Signature sig_b;

    bool verify(const Genesis& g) const;
    std::string to_json() const;
    static EquivocationEvidence from_json(std::string_view line);
};

}  // namespace cbdc

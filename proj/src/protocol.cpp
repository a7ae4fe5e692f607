#include "cbdc/protocol.hpp"

#include "cbdc/bigint.hpp"
#include "cbdc/error.hpp"
#include "cbdc/serialize.hpp"

namespace cbdc {
namespace {

template <class T, class F>
void write_list(Writer& w, const std::vector<T>& items, F&& each) {
    w.u32(static_cast<std::uint32_t>(items.size()));
    for (const auto& item : items) {
        each(w, item);
    }
}

template <class T, class F>
std::vector<T> read_list(Reader& r, F&& each) {
    std::vector<T> out(r.count());
    for (auto& item : out) {
        item = each(r);
    }
    return out;
}

Bytes key_bytes(const KeyId& k) { return {k.bytes.begin(), k.bytes.end()}; }

void add_blinded(std::vector<TranscriptField>& out, std::string_view prefix,
                 const std::vector<BlindedMessage>& list) {
    for (const auto& m : list) {
        out.push_back({std::string(prefix) + ".value", bigint_to_bytes(m.value, m.width), false});
        out.push_back({std::string(prefix) + ".key_id", key_bytes(m.key_id), true});
    }
}

void add_inputs(std::vector<TranscriptField>& out, const std::vector<SpendInput>& inputs) {
    for (const auto& in : inputs) {
        const auto& c = in.certificate;
        out.push_back({"input.token_id", {in.token_id.bytes.begin(), in.token_id.bytes.end()}, false});
        out.push_back({"input.verification_key",
                       {in.verification_key.bytes.begin(), in.verification_key.bytes.end()}, false});
        out.push_back({"input.certificate.key_id", key_bytes(c.key_id), true});
        out.push_back({"input.certificate.signature", bigint_to_bytes(c.signature.s, c.signature.width),
                       false});
        out.push_back({"input.authorization.context_hash",
                       {in.authorization.context_hash.bytes.begin(),
                        in.authorization.context_hash.bytes.end()},
                       false});
        out.push_back({"input.authorization.signature",
                       {in.authorization.signature.bytes.begin(), in.authorization.signature.bytes.end()},
                       false});
    }
}

}  // namespace

Bytes Quote::encode() const {
    Writer w;
    w.str("cbdc/quote/v1").u32(destination).u64(nonce).u64(timestamp);
    return w.take();
}

Quote Quote::decode(ByteView data) {
    Reader r(data);
    if (r.str() != "cbdc/quote/v1") throw Error(Errc::Malformed, "quote tag");
    Quote q;
    q.destination = r.u32();
    q.nonce = r.u64();
    q.timestamp = r.u64();
    r.expect_done();
    return q;
}

Bytes WithdrawalRequest::encode() const {
    Writer w;
    w.str("cbdc/withdraw-req/v1");
    write_list(w, outputs, write_blinded);
    return w.take();
}

WithdrawalRequest WithdrawalRequest::decode(ByteView data) {
    Reader r(data);
    if (r.str() != "cbdc/withdraw-req/v1") throw Error(Errc::Malformed, "withdrawal request tag");
    WithdrawalRequest m;
    m.outputs = read_list<BlindedMessage>(r, read_blinded);
    r.expect_done();
    return m;
}

Bytes DepositSubmission::encode() const {
    Writer w;
    w.str("cbdc/deposit-sub/v1");
    write_list(w, inputs, write_spend_input);
    write_list(w, change, write_blinded);
    return w.take();
}

DepositSubmission DepositSubmission::decode(ByteView data) {
    Reader r(data);
    if (r.str() != "cbdc/deposit-sub/v1") throw Error(Errc::Malformed, "deposit submission tag");
    DepositSubmission m;
    m.inputs = read_list<SpendInput>(r, read_spend_input);
    m.change = read_list<BlindedMessage>(r, read_blinded);
    r.expect_done();
    return m;
}

Bytes MediationRequest::encode() const {
    Writer w;
    w.str("cbdc/mediation-req/v1");
    write_list(w, inputs, write_spend_input);
    write_list(w, outputs, write_blinded);
    w.boolean(id_attestation.has_value());
    if (id_attestation) w.bytes(*id_attestation);
    return w.take();
}

MediationRequest MediationRequest::decode(ByteView data) {
    Reader r(data);
    if (r.str() != "cbdc/mediation-req/v1") throw Error(Errc::Malformed, "mediation request tag");
    MediationRequest m;
    m.inputs = read_list<SpendInput>(r, read_spend_input);
    m.outputs = read_list<BlindedMessage>(r, read_blinded);
    if (r.boolean()) m.id_attestation = r.bytes();
    r.expect_done();
    return m;
}

Bytes SignatureResponse::encode() const {
    Writer w;
    w.str("cbdc/sig-resp/v1");
    write_list(w, signatures, write_blind_signature);
    return w.take();
}

SignatureResponse SignatureResponse::decode(ByteView data) {
    Reader r(data);
    if (r.str() != "cbdc/sig-resp/v1") throw Error(Errc::Malformed, "signature response tag");
    SignatureResponse m;
    m.signatures = read_list<BlindSignature>(r, read_blind_signature);
    r.expect_done();
    return m;
}

std::vector<TranscriptField> fields_of(const WithdrawalRequest& m) {
    std::vector<TranscriptField> out;
    add_blinded(out, "output", m.outputs);
    return out;
}

std::vector<TranscriptField> fields_of(const DepositSubmission& m) {
    std::vector<TranscriptField> out;
    add_inputs(out, m.inputs);
    add_blinded(out, "change", m.change);
    return out;
}

std::vector<TranscriptField> fields_of(const MediationRequest& m) {
    std::vector<TranscriptField> out;
    add_inputs(out, m.inputs);
    add_blinded(out, "output", m.outputs);
    if (m.id_attestation) out.push_back({"id_attestation", *m.id_attestation, false});
    return out;
}

}  // namespace cbdc

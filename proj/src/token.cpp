#include "cbdc/token.hpp"

#include "cbdc/error.hpp"

#include <string>

namespace cbdc {

namespace {

Bytes authorization_message(const TokenId& id, const Hash256& context_hash) {
    Writer w;
    w.str("cbdc/spend/v1").digest(id).digest(context_hash);
    return w.take();
}

}  // namespace

TokenId token_id_of(const VerifyKey& key) { return TokenId::from(sha256(key.view())); }

Hash256 SpendContext::hash() const {
    Writer w;
    write_context(w, *this);
    return sha256(w.data());
}

std::pair<TokenKeyPair, TokenId> new_pretoken(Amount denomination, std::uint32_t /*vintage*/,
                                              const DenominationSet& denominations, Rng& rng) {
    if (!denominations.contains(denomination)) {
        throw Error(Errc::InvalidDenomination, std::to_string(denomination));
    }
    TokenKeyPair keys{SigningKey::from_seed(rng.next_hash())};
    auto id = token_id_of(keys.verification());
    return {std::move(keys), id};
}

bool verify_certificate(const Certificate& cert, const IssuerPublicKey& issuer) {
    return cert.key_id == issuer.key_id && cert.signature.key_id == issuer.key_id &&
           verify(cert.token_id.view(), cert.signature, issuer);
}

SpendAuthorization authorize_spend(const Token& token, const SpendContext& context,
                                   const IssuerPublicKey& issuer) {
    if (token.certificate.token_id != token_id_of(token.keys.verification()) ||
        !verify_certificate(token.certificate, issuer)) {
        throw Error(Errc::InvalidCertificate, token.id().short_hex());
    }
    SpendAuthorization auth;
    auth.token_id = token.id();
    auth.context_hash = context.hash();
    auth.signature = token.keys.signing.sign(authorization_message(auth.token_id, auth.context_hash));
    return auth;
}

bool verify_spend(const TokenId& token_id, const VerifyKey& verification_key,
                  const Certificate& certificate, const SpendAuthorization& authorization,
                  const SpendContext& context, const IssuerPublicKey& issuer) {
    if (token_id_of(verification_key) != token_id || certificate.token_id != token_id ||
        authorization.token_id != token_id) {
        return false;
    }
    if (authorization.context_hash != context.hash()) {
        return false;
    }
    if (!verify_signature(verification_key,
                          authorization_message(token_id, authorization.context_hash),
                          authorization.signature)) {
        return false;
    }
    return verify_certificate(certificate, issuer);
}

SpendInput make_spend_input(const Token& token, const SpendContext& context,
                            const IssuerPublicKey& issuer) {
    return SpendInput{token.id(), token.keys.verification(), token.certificate,
                      authorize_spend(token, context, issuer)};
}

void write_certificate(Writer& w, const Certificate& c) {
    w.digest(c.token_id).digest(c.key_id);
    write_token_signature(w, c.signature);
}

Certificate read_certificate(Reader& r) {
    Certificate c;
    c.token_id = r.digest<TokenIdTag>();
    c.key_id = r.digest<KeyIdTag>();
    c.signature = read_token_signature(r);
    return c;
}

void write_spend_input(Writer& w, const SpendInput& in) {
    w.digest(in.token_id);
    w.raw(in.verification_key.view());
    write_certificate(w, in.certificate);
    w.digest(in.authorization.token_id).digest(in.authorization.context_hash);
    w.raw(in.authorization.signature.view());
}

SpendInput read_spend_input(Reader& r) {
    SpendInput in;
    in.token_id = r.digest<TokenIdTag>();
    auto vk = r.raw(32);
    std::copy(vk.begin(), vk.end(), in.verification_key.bytes.begin());
    in.certificate = read_certificate(r);
    in.authorization.token_id = r.digest<TokenIdTag>();
    in.authorization.context_hash = r.digest<HashTag>();
    auto sig = r.raw(64);
    std::copy(sig.begin(), sig.end(), in.authorization.signature.bytes.begin());
    return in;
}

void write_context(Writer& w, const SpendContext& c) {
    w.str("cbdc/spend-context/v1").u32(c.destination).u64(c.nonce).u64(c.amount).u64(c.timestamp);
}

SpendContext read_context(Reader& r) {
    if (r.str() != "cbdc/spend-context/v1") {
        throw Error(Errc::Malformed, "spend context tag");
    }
    SpendContext c;
    c.destination = r.u32();
    c.nonce = r.u64();
    c.amount = r.u64();
    c.timestamp = r.u64();
    return c;
}

}  // namespace cbdc

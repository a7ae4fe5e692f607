#pragma once

#include "cbdc/blindsig.hpp"
#include "cbdc/bytes.hpp"
#include "cbdc/crypto.hpp"
#include "cbdc/denomination.hpp"
#include "cbdc/serialize.hpp"
#include "cbdc/types.hpp"

#include <cstdint>
#include <string_view>
#include <unordered_set>
#include <utility>

namespace cbdc {

/// Declares the wallet-side and issuer-side schemes fixed for this build.
inline constexpr std::string_view kProtocolVersion = "cbdc-v1/ed25519/rsa-fdh-sha256";

/// Per-token Ed25519 keypair; fresh for every token.
struct TokenKeyPair {
    SigningKey signing;

    const VerifyKey& verification() const { return signing.verify_key(); }
};

TokenId token_id_of(const VerifyKey& key);

/// Issuer certificate: the blind signature over the token id, unblinded.
struct Certificate {
    TokenId token_id;
    KeyId key_id;
    TokenSignature signature;
};

/// A bearer token. Its value is implied by certificate.key_id; there is no
/// amount field.
struct Token {
    TokenKeyPair keys;
    Certificate certificate;

    const TokenId& id() const { return certificate.token_id; }
};

/// What a spend is bound to: one destination MSB, one entry nonce, the total
/// input value of that entry, and the entry's logical time.
struct SpendContext {
    NodeId destination = 0;
    std::uint64_t nonce = 0;
    Amount amount = 0;
    TimeMs timestamp = 0;

    Hash256 hash() const;
    bool operator==(const SpendContext&) const = default;
};

struct SpendAuthorization {
    TokenId token_id;
    Hash256 context_hash;
    Signature signature;
};

/// One spent token as it appears in a Deposit or MediatedTransfer entry.
struct SpendInput {
    TokenId token_id;
    VerifyKey verification_key;
    Certificate certificate;
    SpendAuthorization authorization;
};

std::pair<TokenKeyPair, TokenId> new_pretoken(Amount denomination, std::uint32_t vintage,
                                              const DenominationSet& denominations, Rng& rng);

/// Throws InvalidCertificate if the token's certificate does not verify.
SpendAuthorization authorize_spend(const Token& token, const SpendContext& context,
                                   const IssuerPublicKey& issuer);

bool verify_certificate(const Certificate& cert, const IssuerPublicKey& issuer);

bool verify_spend(const TokenId& token_id, const VerifyKey& verification_key,
                  const Certificate& certificate, const SpendAuthorization& authorization,
                  const SpendContext& context, const IssuerPublicKey& issuer);

inline bool verify_spend(const SpendInput& in, const SpendContext& context,
                         const IssuerPublicKey& issuer) {
    return verify_spend(in.token_id, in.verification_key, in.certificate, in.authorization, context,
                        issuer);
}

SpendInput make_spend_input(const Token& token, const SpendContext& context,
                            const IssuerPublicKey& issuer);

/// Token ids consumed by committed entries. Append-only; mutated only by the
/// ledger apply step.
class SpentSet {
public:
    /// True and inserts when absent; false without mutation when present.
    bool record_spent(const TokenId& id) { return ids_.insert(id).second; }
    bool contains(const TokenId& id) const { return ids_.contains(id); }
    std::size_t size() const { return ids_.size(); }

private:
    std::unordered_set<TokenId, DigestHash> ids_;
};

void write_certificate(Writer& w, const Certificate& c);
Certificate read_certificate(Reader& r);
void write_spend_input(Writer& w, const SpendInput& in);
SpendInput read_spend_input(Reader& r);
void write_context(Writer& w, const SpendContext& c);
SpendContext read_context(Reader& r);

}  // namespace cbdc

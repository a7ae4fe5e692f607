#pragma once

#include "cbdc/bigint.hpp"
#include "cbdc/bytes.hpp"
#include "cbdc/crypto.hpp"
#include "cbdc/denomination.hpp"
#include "cbdc/types.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace cbdc {

// Chaum-style RSA full-domain-hash blind signatures. One issuer key per
// (denomination, vintage): the key id alone fixes a token's value.

enum class KeyProfile { Test, Production };

inline constexpr unsigned kMinTestModulusBits = 512;
inline constexpr unsigned kMinProductionModulusBits = 2048;
inline constexpr unsigned long kPublicExponent = 65537;

struct IssuerPublicKey {
    KeyId key_id;
    Amount denomination = 0;
    std::uint32_t vintage = 0;
    mpz_class n;
    mpz_class e;
    unsigned bits = 0;

    std::size_t modulus_bytes() const { return (bits + 7) / 8; }
};

class IssuerKeyPair {
public:
    const IssuerPublicKey& pub() const { return pub_; }
    const KeyId& key_id() const { return pub_.key_id; }
    const mpz_class& private_exponent() const { return d_; }

    /// x^d mod n via CRT.
    mpz_class private_op(const mpz_class& x) const;

private:
    friend IssuerKeyPair keygen(Amount, std::uint32_t, unsigned, std::uint64_t,
                                const DenominationSet&, KeyProfile);

    IssuerPublicKey pub_;
    mpz_class d_, p_, q_, dp_, dq_, qinv_;
};

// `width` is the serialized byte width of the big integer; it equals the
// issuer modulus byte length for values produced here.

struct BlindedMessage {
    mpz_class value;
    KeyId key_id;
    std::size_t width = 0;
};

/// Wallet-local; never serialized into a ledger entry or protocol message.
struct BlindingFactor {
    mpz_class r;
    KeyId key_id;
};

/// s' = blinded^d mod n, as returned by the issuer.
struct BlindSignature {
    mpz_class value;
    KeyId key_id;
    std::size_t width = 0;
};

struct TokenSignature {
    mpz_class s;
    KeyId key_id;
    std::size_t width = 0;
};

KeyId compute_key_id(const mpz_class& n, const mpz_class& e, Amount denomination,
                     std::uint32_t vintage);

IssuerKeyPair keygen(Amount denomination, std::uint32_t vintage, unsigned security_bits,
                     std::uint64_t seed, const DenominationSet& denominations,
                     KeyProfile profile = KeyProfile::Test);

/// SHA-256 in counter mode, masked to the modulus bit length and resampled
/// until the value falls below n.
mpz_class full_domain_hash(ByteView message, const mpz_class& n);

std::pair<BlindedMessage, BlindingFactor> blind(ByteView message, const IssuerPublicKey& pub,
                                                Rng& rng);
/// Deterministic blinding with a caller-chosen factor r (must be coprime to n).
BlindedMessage blind_with_factor(ByteView message, const IssuerPublicKey& pub, const mpz_class& r);

BlindSignature sign_blinded(const BlindedMessage& blinded, const IssuerKeyPair& key);
TokenSignature unblind(const BlindSignature& blind_sig, const BlindingFactor& factor,
                       const IssuerPublicKey& pub);
bool verify(ByteView message, const TokenSignature& sig, const IssuerPublicKey& pub);

void write_blinded(Writer& w, const BlindedMessage& m);
BlindedMessage read_blinded(Reader& r);
void write_blind_signature(Writer& w, const BlindSignature& s);
BlindSignature read_blind_signature(Reader& r);
void write_token_signature(Writer& w, const TokenSignature& s);
TokenSignature read_token_signature(Reader& r);

/// Public issuer keys by key id.
class IssuerRegistry {
public:
    void add(const IssuerPublicKey& key);
    const IssuerPublicKey* find(const KeyId& id) const;
    const IssuerPublicKey& at(const KeyId& id) const;
    /// Key for (denomination, vintage), or nullptr.
    const IssuerPublicKey* find(Amount denomination, std::uint32_t vintage) const;
    const std::map<KeyId, IssuerPublicKey>& keys() const { return keys_; }
    std::size_t size() const { return keys_.size(); }

private:
    std::map<KeyId, IssuerPublicKey> keys_;
};

}  // namespace cbdc

#include "cbdc/blindsig.hpp"

#include "cbdc/error.hpp"

#include <string>
#include <tuple>

namespace cbdc {

namespace {

// Prime of exactly `bits` bits with the top two bits set, so that the
// product of two such primes has exactly 2*bits bits.
mpz_class random_prime(unsigned bits, Rng& rng) {
    Bytes buf((bits + 7) / 8);
    const mpz_class top = mpz_class(1) << (bits - 1);
    for (;;) {
        rng.fill(buf);
        auto candidate = bigint_from_bytes(buf);
        candidate %= top;
        candidate |= top;
        candidate |= mpz_class(1) << (bits - 2);
        candidate |= 1;
        mpz_class p;
        mpz_nextprime(p.get_mpz_t(), candidate.get_mpz_t());
        if (bit_length(p) != bits) {
            continue;
        }
        if (mpz_tstbit(p.get_mpz_t(), bits - 2) == 0) {
            continue;
        }
        mpz_class g;
        mpz_class pm1 = p - 1;
        mpz_gcd_ui(g.get_mpz_t(), pm1.get_mpz_t(), kPublicExponent);
        if (g != 1) {
            continue;
        }
        return p;
    }
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
    mpz_class out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return out;
}

}  // namespace

KeyId compute_key_id(const mpz_class& n, const mpz_class& e, Amount denomination,
                     std::uint32_t vintage) {
    Writer w;
    w.str("cbdc/issuer-key/v1");
    w.bytes(bigint_to_bytes(n, byte_length(n)));
    w.bytes(bigint_to_bytes(e, byte_length(e)));
    w.u64(denomination);
    w.u32(vintage);
    return KeyId::from(sha256(w.data()));
}

IssuerKeyPair keygen(Amount denomination, std::uint32_t vintage, unsigned security_bits,
                     std::uint64_t seed, const DenominationSet& denominations, KeyProfile profile) {
    if (!denominations.contains(denomination)) {
        throw Error(Errc::InvalidDenomination, std::to_string(denomination));
    }
    const unsigned floor =
        profile == KeyProfile::Production ? kMinProductionModulusBits : kMinTestModulusBits;
    if (security_bits < floor || security_bits % 2 != 0) {
        throw Error(Errc::WeakParameter, "modulus bits " + std::to_string(security_bits));
    }

    Rng rng(Sha256{}
                .update("cbdc/issuer-keygen/v1")
                .update_u64(seed)
                .update_u64(denomination)
                .update_u64(vintage)
                .update_u64(security_bits)
                .finish());

    const unsigned half = security_bits / 2;
    mpz_class p = random_prime(half, rng);
    mpz_class q;
    do {
        q = random_prime(half, rng);
    } while (q == p);
    if (p < q) {
        std::swap(p, q);
    }

    IssuerKeyPair key;
    key.pub_.n = p * q;
    key.pub_.e = kPublicExponent;
    key.pub_.bits = security_bits;
    key.pub_.denomination = denomination;
    key.pub_.vintage = vintage;
    key.pub_.key_id = compute_key_id(key.pub_.n, key.pub_.e, denomination, vintage);

    mpz_class pm1 = p - 1;
    mpz_class qm1 = q - 1;
    mpz_class lambda;
    mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
    if (mpz_invert(key.d_.get_mpz_t(), key.pub_.e.get_mpz_t(), lambda.get_mpz_t()) == 0) {
        throw Error(Errc::WeakParameter, "public exponent not invertible");
    }
    key.p_ = p;
    key.q_ = q;
    key.dp_ = key.d_ % pm1;
    key.dq_ = key.d_ % qm1;
    mpz_invert(key.qinv_.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    return key;
}

mpz_class IssuerKeyPair::private_op(const mpz_class& x) const {
    mpz_class m1 = powm(x % p_, dp_, p_);
    mpz_class m2 = powm(x % q_, dq_, q_);
    mpz_class h = (qinv_ * (m1 - m2)) % p_;
    if (h < 0) {
        h += p_;
    }
    return m2 + h * q_;
}

mpz_class full_domain_hash(ByteView message, const mpz_class& n) {
    const auto bits = bit_length(n);
    const auto nbytes = (bits + 7) / 8;
    const auto excess = nbytes * 8 - bits;
    const auto digest = sha256(message);
    Bytes buf;
    buf.reserve(nbytes + 32);
    for (std::uint32_t attempt = 0;; ++attempt) {
        buf.clear();
        for (std::uint32_t block = 0; buf.size() < nbytes; ++block) {
            auto h = Sha256{}
                         .update("cbdc/fdh/v1")
                         .update_u64((std::uint64_t{attempt} << 32) | block)
                         .update(digest)
                         .finish();
            buf.insert(buf.end(), h.bytes.begin(), h.bytes.end());
        }
        buf.resize(nbytes);
        buf[0] &= static_cast<std::uint8_t>(0xff >> excess);
        auto v = bigint_from_bytes(buf);
        if (v < n) {
            return v;
        }
    }
}

BlindedMessage blind_with_factor(ByteView message, const IssuerPublicKey& pub, const mpz_class& r) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pub.n.get_mpz_t());
    if (r <= 0 || r >= pub.n || g != 1) {
        throw Error(Errc::Malformed, "blinding factor not a unit mod n");
    }
    auto h = full_domain_hash(message, pub.n);
    return {(h * powm(r, pub.e, pub.n)) % pub.n, pub.key_id, pub.modulus_bytes()};
}

std::pair<BlindedMessage, BlindingFactor> blind(ByteView message, const IssuerPublicKey& pub,
                                                Rng& rng) {
    for (;;) {
        auto r = random_below(pub.n, rng);
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pub.n.get_mpz_t());
        if (r == 0 || g != 1) {
            continue;
        }
        auto blinded = blind_with_factor(message, pub, r);
        return {std::move(blinded), BlindingFactor{std::move(r), pub.key_id}};
    }
}

BlindSignature sign_blinded(const BlindedMessage& blinded, const IssuerKeyPair& key) {
    if (blinded.key_id != key.key_id()) {
        throw Error(Errc::KeyMismatch, "blinded message for " + blinded.key_id.short_hex());
    }
    if (blinded.value < 0 || blinded.value >= key.pub().n) {
        throw Error(Errc::Malformed, "blinded value out of range");
    }
    return {key.private_op(blinded.value), key.key_id(), key.pub().modulus_bytes()};
}

TokenSignature unblind(const BlindSignature& blind_sig, const BlindingFactor& factor,
                       const IssuerPublicKey& pub) {
    if (factor.key_id != pub.key_id || blind_sig.key_id != pub.key_id) {
        throw Error(Errc::KeyMismatch, "unblind under " + pub.key_id.short_hex());
    }
    mpz_class inv;
    if (mpz_invert(inv.get_mpz_t(), factor.r.get_mpz_t(), pub.n.get_mpz_t()) == 0) {
        throw Error(Errc::Malformed, "blinding factor not invertible");
    }
    return {(blind_sig.value * inv) % pub.n, pub.key_id, pub.modulus_bytes()};
}

bool verify(ByteView message, const TokenSignature& sig, const IssuerPublicKey& pub) {
    if (sig.key_id != pub.key_id || sig.s <= 0 || sig.s >= pub.n) {
        return false;
    }
    return powm(sig.s, pub.e, pub.n) == full_domain_hash(message, pub.n);
}

namespace {

std::size_t field_width(const mpz_class& v, std::size_t width) {
    return width == 0 ? byte_length(v) : width;
}

std::pair<mpz_class, std::size_t> read_field(Reader& r) {
    auto raw = r.bytes();
    return {bigint_from_bytes(raw), raw.size()};
}

}  // namespace

void write_blinded(Writer& w, const BlindedMessage& m) {
    w.digest(m.key_id);
    write_bigint(w, m.value, field_width(m.value, m.width));
}

BlindedMessage read_blinded(Reader& r) {
    BlindedMessage m;
    m.key_id = r.digest<KeyIdTag>();
    std::tie(m.value, m.width) = read_field(r);
    return m;
}

void write_blind_signature(Writer& w, const BlindSignature& s) {
    w.digest(s.key_id);
    write_bigint(w, s.value, field_width(s.value, s.width));
}

BlindSignature read_blind_signature(Reader& r) {
    BlindSignature s;
    s.key_id = r.digest<KeyIdTag>();
    std::tie(s.value, s.width) = read_field(r);
    return s;
}

void write_token_signature(Writer& w, const TokenSignature& s) {
    w.digest(s.key_id);
    write_bigint(w, s.s, field_width(s.s, s.width));
}

TokenSignature read_token_signature(Reader& r) {
    TokenSignature s;
    s.key_id = r.digest<KeyIdTag>();
    std::tie(s.s, s.width) = read_field(r);
    return s;
}

void IssuerRegistry::add(const IssuerPublicKey& key) { keys_[key.key_id] = key; }

const IssuerPublicKey* IssuerRegistry::find(const KeyId& id) const {
    auto it = keys_.find(id);
    return it == keys_.end() ? nullptr : &it->second;
}

const IssuerPublicKey& IssuerRegistry::at(const KeyId& id) const {
    auto* key = find(id);
    if (key == nullptr) {
        throw Error(Errc::UnknownKeyId, id.short_hex());
    }
    return *key;
}

const IssuerPublicKey* IssuerRegistry::find(Amount denomination, std::uint32_t vintage) const {
    for (const auto& [id, key] : keys_) {
        if (key.denomination == denomination && key.vintage == vintage) {
            return &key;
        }
    }
    return nullptr;
}

}  // namespace cbdc

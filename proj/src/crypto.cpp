#include "cbdc/crypto.hpp"

#include "cbdc/error.hpp"

#include <sodium.h>

#include <cstring>

namespace cbdc {

namespace {

void ensure_sodium() {
    static const bool ready = sodium_init() >= 0;
    if (!ready) {
        throw Error(Errc::Io, "libsodium failed to initialise");
    }
}

crypto_hash_sha256_state* as_state(std::array<std::uint8_t, 128>& raw) {
    static_assert(sizeof(crypto_hash_sha256_state) <= 128);
    return reinterpret_cast<crypto_hash_sha256_state*>(raw.data());
}

}  // namespace

Hash256 sha256(ByteView data) {
    Hash256 out;
    crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
    return out;
}

Sha256::Sha256() { crypto_hash_sha256_init(as_state(state_)); }

Sha256& Sha256::update(ByteView data) {
    crypto_hash_sha256_update(as_state(state_), data.data(), data.size());
    return *this;
}

Sha256& Sha256::update_u64(std::uint64_t v) {
    std::array<std::uint8_t, 8> be{};
    for (int i = 7; i >= 0; --i) {
        be[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
        v >>= 8;
    }
    return update(ByteView{be.data(), be.size()});
}

Hash256 Sha256::finish() {
    Hash256 out;
    crypto_hash_sha256_final(as_state(state_), out.bytes.data());
    return out;
}

SigningKey SigningKey::from_seed(const Hash256& seed) {
    ensure_sodium();
    SigningKey key;
    crypto_sign_seed_keypair(key.pk_.bytes.data(), key.sk_.data(), seed.bytes.data());
    return key;
}

Hash256 SigningKey::seed() const {
    Hash256 out;
    crypto_sign_ed25519_sk_to_seed(out.bytes.data(), sk_.data());
    return out;
}

Signature SigningKey::sign(ByteView message) const {
    Signature sig;
    crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), sk_.data());
    return sig;
}

bool verify_signature(const VerifyKey& key, ByteView message, const Signature& sig) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                       key.bytes.data()) == 0;
}

Rng::Rng(std::uint64_t seed) {
    auto key = Sha256{}.update("cbdc/rng/v1").update_u64(seed).finish();
    key_ = key.bytes;
}

Rng::Rng(const Hash256& key) : key_(key.bytes) {}

void Rng::refill() {
    std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
    auto b = block_++;
    for (std::size_t i = 0; i < nonce.size(); ++i) {
        nonce[i] = static_cast<std::uint8_t>(b >> (8 * i));
    }
    crypto_stream_chacha20(buf_.data(), buf_.size(), nonce.data(), key_.data());
    pos_ = 0;
}

void Rng::fill(std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
        if (pos_ == buf_.size()) {
            refill();
        }
        auto n = std::min(out.size() - done, buf_.size() - pos_);
        std::memcpy(out.data() + done, buf_.data() + pos_, n);
        pos_ += n;
        done += n;
    }
}

std::uint64_t Rng::next_u64() {
    std::array<std::uint8_t, 8> raw{};
    fill(raw);
    std::uint64_t v = 0;
    for (auto b : raw) {
        v = (v << 8) | b;
    }
    return v;
}

Hash256 Rng::next_hash() {
    Hash256 h;
    fill(h.bytes);
    return h;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
    if (bound == 0) {
        throw Error(Errc::Malformed, "uniform bound must be positive");
    }
    // Rejection on the top partial bucket keeps the draw exactly uniform.
    const std::uint64_t limit = max() - (max() % bound + 1) % bound;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v > limit);
    return v % bound;
}

std::uint64_t Rng::between(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) {
        std::swap(lo, hi);
    }
    if (lo == 0 && hi == max()) {
        return next_u64();
    }
    return lo + uniform(hi - lo + 1);
}

double Rng::unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

bool Rng::chance(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return unit() < p;
}

Rng Rng::fork(std::string_view label) {
    auto child = Sha256{}.update(ByteView{key_.data(), key_.size()}).update(label).update(next_hash()).finish();
    return Rng(child);
}

}  // namespace cbdc

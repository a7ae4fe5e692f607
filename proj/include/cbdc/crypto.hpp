#pragma once

#include "cbdc/bytes.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace cbdc {

Hash256 sha256(ByteView data);
inline Hash256 sha256(std::string_view s) { return sha256(as_bytes(s)); }

class Sha256 {
public:
    Sha256();
    Sha256& update(ByteView data);
    Sha256& update(std::string_view s) { return update(as_bytes(s)); }
    template <class Tag>
    Sha256& update(const Digest32<Tag>& d) {
        return update(d.view());
    }
    Sha256& update_u64(std::uint64_t v);
    Hash256 finish();

private:
    alignas(16) std::array<std::uint8_t, 128> state_{};
};

struct VerifyKey {
    std::array<std::uint8_t, 32> bytes{};
    auto operator<=>(const VerifyKey&) const = default;
    ByteView view() const { return {bytes.data(), bytes.size()}; }
};

struct Signature {
    std::array<std::uint8_t, 64> bytes{};
    auto operator<=>(const Signature&) const = default;
    ByteView view() const { return {bytes.data(), bytes.size()}; }
};

/// Ed25519 signing key. Signatures are deterministic, which keeps simulated
/// runs byte-reproducible.
class SigningKey {
public:
    static SigningKey from_seed(const Hash256& seed);

    Signature sign(ByteView message) const;
    const VerifyKey& verify_key() const { return pk_; }
    /// The 32-byte seed this key was derived from. Secret.
    Hash256 seed() const;

private:
    std::array<std::uint8_t, 64> sk_{};
    VerifyKey pk_;
};

bool verify_signature(const VerifyKey& key, ByteView message, const Signature& sig);

/// Seeded ChaCha20 keystream. Every random choice in the system flows from
/// one of these, so a seed fixes a whole run.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);
    explicit Rng(const Hash256& key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64();
    void fill(std::span<std::uint8_t> out);
    Hash256 next_hash();
    /// Uniform in [0, bound); bound must be > 0.
    std::uint64_t uniform(std::uint64_t bound);
    /// Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi);
    /// Uniform in [0, 1) with 53 bits of precision.
    double unit();
    bool chance(double p);
    /// Independent child stream; same parent state and label give the same child.
    Rng fork(std::string_view label);

    template <class It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = uniform(i);
            std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1),
                           first + static_cast<std::ptrdiff_t>(j));
        }
    }

private:
    void refill();

    std::array<std::uint8_t, 32> key_{};
    std::uint64_t block_ = 0;
    std::array<std::uint8_t, 512> buf_{};
    std::size_t pos_ = 512;
};

}  // namespace cbdc

#include "cbdc/blindsig.hpp"
#include "cbdc/error.hpp"

#include <gtest/gtest.h>

#include <array>
#include <set>
#include <string>

using namespace cbdc;

namespace {

const DenominationSet& denoms() {
    static const DenominationSet d = DenominationSet::powers_of_two(12);
    return d;
}

const IssuerKeyPair& key_a() {
    static const IssuerKeyPair k = keygen(1, 2025, 512, 7, denoms());
    return k;
}

const IssuerKeyPair& key_b() {
    static const IssuerKeyPair k = keygen(2, 2025, 512, 7, denoms());
    return k;
}

Bytes msg(std::uint64_t i) {
    Writer w;
    w.str("message").u64(i);
    return w.take();
}

// Counts bits by repeated halving; independent of mpz_sizeinbase.
unsigned count_bits(mpz_class v) {
    unsigned bits = 0;
    while (v > 0) {
        v >>= 1;
        ++bits;
    }
    return bits;
}

mpz_class modpow(const mpz_class& b, const mpz_class& e, const mpz_class& m) {
    mpz_class out;
    mpz_powm(out.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
    return out;
}

}  // namespace

TEST(Keygen, DeterministicFromSeed) {
    auto again = keygen(1, 2025, 512, 7, denoms());
    EXPECT_EQ(again.key_id(), key_a().key_id());
    EXPECT_EQ(again.pub().n, key_a().pub().n);
    auto other_seed = keygen(1, 2025, 512, 8, denoms());
    EXPECT_NE(other_seed.key_id(), key_a().key_id());
}

TEST(Keygen, KeyIdCommitsToModulusExponentDenominationVintage) {
    const auto& pub = key_a().pub();
    EXPECT_EQ(pub.key_id, compute_key_id(pub.n, pub.e, 1, 2025));
    EXPECT_NE(pub.key_id, compute_key_id(pub.n, pub.e, 1, 2026));
    EXPECT_NE(pub.key_id, compute_key_id(pub.n, pub.e, 2, 2025));
}

TEST(Keygen, RejectsDenominationOutsideSet) {
    try {
        keygen(3, 2025, 512, 7, denoms());
        FAIL() << "expected InvalidDenomination";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidDenomination);
    }
}

TEST(Keygen, RejectsWeakParameters) {
    for (unsigned bits : {256u, 510u, 513u}) {
        try {
            keygen(1, 2025, bits, 7, denoms());
            FAIL() << "expected WeakParameter for " << bits;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::WeakParameter);
        }
    }
    try {
        keygen(1, 2025, 1024, 7, denoms(), KeyProfile::Production);
        FAIL() << "production profile must refuse 1024-bit moduli";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::WeakParameter);
    }
}

TEST(Keygen, ProductionModulusHasExactly2048Bits) {
    auto key = keygen(1, 2025, 2048, 7, denoms(), KeyProfile::Production);
    EXPECT_EQ(count_bits(key.pub().n), 2048u);
    EXPECT_EQ(key.pub().modulus_bytes(), 256u);
}

TEST(Keygen, PrivateExponentInvertsPublicExponent) {
    // (x^e)^d == x for random x exercises e*d == 1 mod lambda(n).
    Rng rng(99);
    const auto& pub = key_a().pub();
    for (int i = 0; i < 50; ++i) {
        auto x = random_below(pub.n, rng);
        auto y = modpow(x, pub.e, pub.n);
        EXPECT_EQ(modpow(y, key_a().private_exponent(), pub.n), x);
        EXPECT_EQ(key_a().private_op(y), x);
    }
}

TEST(FullDomainHash, MatchesFrozenReferenceValues) {
    // Produced by an independent Python/hashlib implementation of the same
    // counter-mode construction.
    const mpz_class n = (mpz_class(1) << 300) + 12345;
    EXPECT_EQ(full_domain_hash(as_bytes("hello"), n),
              mpz_class("f9d671992cc40814cd339eb2f1819811fb831952d05077fc37c470adb7f67edb8741bc05dde", 16));
    // Needs three rejections before landing below n.
    EXPECT_EQ(full_domain_hash(as_bytes(""), n),
              mpz_class("d62646b40b01f05ff02cf0babdcfe16d66be246bdaf3d70dda6650306ee1cc95326ba5a739", 16));
    const mpz_class n2 = (mpz_class(1) << 256) + 1;
    EXPECT_EQ(full_domain_hash(as_bytes("hello"), n2),
              mpz_class("a69fa440a1ba485cad486778db2056320ebf636cd1e218e2e34ebb5ddca5ff28", 16));
}

TEST(Blind, IndependentRandomnessGivesDistinctBlindedValues) {
    Rng rng(1);
    const auto m = msg(42);
    std::set<std::string> seen;
    for (int i = 0; i < 1000; ++i) {
        auto [blinded, factor] = blind(m, key_a().pub(), rng);
        EXPECT_TRUE(seen.insert(blinded.value.get_str(16)).second);
    }
}

TEST(Blind, IdentityFactorYieldsHashOfMessage) {
    const auto& pub = key_a().pub();
    auto blinded = blind_with_factor(msg(3), pub, 1);
    EXPECT_EQ(blinded.value, full_domain_hash(msg(3), pub.n) % pub.n);
    EXPECT_EQ(blinded.key_id, pub.key_id);
}

TEST(Blind, DeterministicGivenFactor) {
    const auto& pub = key_a().pub();
    mpz_class r("123456789abcdef", 16);
    EXPECT_EQ(blind_with_factor(msg(5), pub, r).value, blind_with_factor(msg(5), pub, r).value);
}

TEST(Blind, BlindedLowBitsPassChiSquare) {
    // 16 bins over the low 4 bits; chi-square with 15 dof, alpha = 0.01
    // critical value 30.578.
    Rng rng(2024);
    const auto m = msg(0);
    std::array<int, 16> bins{};
    constexpr int samples = 10000;
    for (int i = 0; i < samples; ++i) {
        auto [blinded, factor] = blind(m, key_a().pub(), rng);
        bins[mpz_class(blinded.value & 15).get_ui()]++;
    }
    double expected = samples / 16.0;
    double chi2 = 0;
    for (int c : bins) {
        chi2 += (c - expected) * (c - expected) / expected;
    }
    EXPECT_LT(chi2, 30.578);
}

TEST(SignBlinded, RejectsKeyMismatch) {
    auto blinded = blind_with_factor(msg(1), key_a().pub(), 1);
    try {
        sign_blinded(blinded, key_b());
        FAIL() << "expected KeyMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::KeyMismatch);
    }
}

TEST(SignBlinded, IdentityBlindingIsPlainFdhSignature) {
    const auto& pub = key_a().pub();
    auto s = sign_blinded(blind_with_factor(msg(9), pub, 1), key_a());
    auto plain = modpow(full_domain_hash(msg(9), pub.n), key_a().private_exponent(), pub.n);
    EXPECT_EQ(s.value, plain);
}

TEST(Unblind, RoundTripVerifiesForRandomMessages) {
    Rng rng(3);
    const auto& pub = key_a().pub();
    int ok = 0;
    for (int i = 0; i < 1000; ++i) {
        auto m = msg(rng.next_u64());
        auto [blinded, factor] = blind(m, pub, rng);
        auto sig = unblind(sign_blinded(blinded, key_a()), factor, pub);
        ok += verify(m, sig, pub) ? 1 : 0;
    }
    EXPECT_EQ(ok, 1000);
}

TEST(Unblind, IdentityFactorLeavesSignatureUnchanged) {
    const auto& pub = key_a().pub();
    auto blind_sig = sign_blinded(blind_with_factor(msg(4), pub, 1), key_a());
    auto sig = unblind(blind_sig, BlindingFactor{1, pub.key_id}, pub);
    EXPECT_EQ(sig.s, blind_sig.value);
    EXPECT_TRUE(verify(msg(4), sig, pub));
}

TEST(Unblind, WrongFactorFailsVerification) {
    Rng rng(4);
    const auto& pub = key_a().pub();
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
        auto m = msg(i);
        auto [blinded, factor] = blind(m, pub, rng);
        auto [unused, wrong] = blind(m, pub, rng);
        auto sig = unblind(sign_blinded(blinded, key_a()), wrong, pub);
        accepted += verify(m, sig, pub) ? 1 : 0;
    }
    EXPECT_EQ(accepted, 0);
}

TEST(Unblind, RejectsFactorForOtherKey) {
    const auto& pub = key_a().pub();
    auto blind_sig = sign_blinded(blind_with_factor(msg(4), pub, 1), key_a());
    EXPECT_THROW(unblind(blind_sig, BlindingFactor{1, key_b().key_id()}, pub), Error);
}

TEST(Verify, RandomSignaturesAreRejected) {
    Rng rng(5);
    const auto& pub = key_a().pub();
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
        TokenSignature forged{random_below(pub.n, rng), pub.key_id};
        accepted += verify(msg(i), forged, pub) ? 1 : 0;
    }
    EXPECT_EQ(accepted, 0);
}

TEST(Verify, SignatureUnderOneKeyFailsUnderAnother) {
    Rng rng(6);
    auto m = msg(77);
    auto [blinded, factor] = blind(m, key_a().pub(), rng);
    auto sig = unblind(sign_blinded(blinded, key_a()), factor, key_a().pub());
    ASSERT_TRUE(verify(m, sig, key_a().pub()));
    EXPECT_FALSE(verify(m, sig, key_b().pub()));
    TokenSignature relabelled{sig.s, key_b().key_id()};
    EXPECT_FALSE(verify(m, relabelled, key_b().pub()));
}

TEST(Verify, OutOfRangeSignatureIsRejected) {
    const auto& pub = key_a().pub();
    EXPECT_FALSE(verify(msg(1), TokenSignature{0, pub.key_id}, pub));
    EXPECT_FALSE(verify(msg(1), TokenSignature{pub.n, pub.key_id}, pub));
}

TEST(Serialization, BigIntegersAreFixedWidthBigEndian) {
    const auto& pub = key_a().pub();
    Writer w;
    write_blinded(w, BlindedMessage{mpz_class(0x0102), pub.key_id, pub.modulus_bytes()});
    const auto& bytes = w.data();
    ASSERT_EQ(bytes.size(), 32u + 4u + 64u);
    EXPECT_EQ(bytes[32 + 4 + 62], 0x01);
    EXPECT_EQ(bytes[32 + 4 + 63], 0x02);
    Reader r(bytes);
    auto back = read_blinded(r);
    EXPECT_EQ(back.value, 0x0102);
    EXPECT_EQ(back.key_id, pub.key_id);
    EXPECT_EQ(back.width, pub.modulus_bytes());
}

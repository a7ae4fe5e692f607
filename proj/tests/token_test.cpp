#include "cbdc/error.hpp"
#include "cbdc/token.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace cbdc;

namespace {

const DenominationSet& denoms() {
    static const DenominationSet d = DenominationSet::powers_of_two(12);
    return d;
}

const IssuerKeyPair& issuer() {
    static const IssuerKeyPair k = keygen(4, 2025, 512, 11, denoms());
    return k;
}

const IssuerKeyPair& other_issuer() {
    static const IssuerKeyPair k = keygen(8, 2025, 512, 11, denoms());
    return k;
}

Token mint(Rng& rng, const IssuerKeyPair& key = issuer()) {
    auto [keys, id] = new_pretoken(key.pub().denomination, 2025, denoms(), rng);
    auto [blinded, factor] = blind(id.view(), key.pub(), rng);
    auto sig = unblind(sign_blinded(blinded, key), factor, key.pub());
    return Token{std::move(keys), Certificate{id, key.key_id(), sig}};
}

SpendContext ctx(std::uint64_t nonce) { return SpendContext{2, nonce, 4, 1000 + nonce}; }

}  // namespace

TEST(NewPretoken, IdsAreDistinct) {
    Rng rng(1);
    std::set<TokenId> ids;
    for (int i = 0; i < 10000; ++i) {
        ids.insert(new_pretoken(1, 2025, denoms(), rng).second);
    }
    EXPECT_EQ(ids.size(), 10000u);
}

TEST(NewPretoken, IdIsHashOfVerificationKey) {
    Rng rng(2);
    auto [keys, id] = new_pretoken(2, 2025, denoms(), rng);
    EXPECT_EQ(id, TokenId::from(sha256(keys.verification().view())));
}

TEST(NewPretoken, RejectsDenominationOutsideSet) {
    Rng rng(3);
    try {
        new_pretoken(7, 2025, denoms(), rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidDenomination);
    }
}

TEST(AuthorizeSpend, RoundTripVerifies) {
    Rng rng(4);
    auto token = mint(rng);
    auto auth = authorize_spend(token, ctx(1), issuer().pub());
    EXPECT_TRUE(verify_spend(token.id(), token.keys.verification(), token.certificate, auth, ctx(1),
                             issuer().pub()));
}

TEST(AuthorizeSpend, AlteredContextFails) {
    Rng rng(5);
    auto token = mint(rng);
    auto auth = authorize_spend(token, ctx(1), issuer().pub());
    EXPECT_FALSE(verify_spend(token.id(), token.keys.verification(), token.certificate, auth, ctx(2),
                              issuer().pub()));
    auto tampered = auth;
    tampered.context_hash = ctx(2).hash();
    EXPECT_FALSE(verify_spend(token.id(), token.keys.verification(), token.certificate, tampered,
                              ctx(2), issuer().pub()));
}

TEST(AuthorizeSpend, TwoContextsBothVerifyCryptographically) {
    // Signature math does not stop a second spend; the spent set does.
    Rng rng(6);
    auto token = mint(rng);
    auto a = make_spend_input(token, ctx(1), issuer().pub());
    auto b = make_spend_input(token, ctx(2), issuer().pub());
    EXPECT_TRUE(verify_spend(a, ctx(1), issuer().pub()));
    EXPECT_TRUE(verify_spend(b, ctx(2), issuer().pub()));
    EXPECT_NE(a.authorization.signature, b.authorization.signature);
}

TEST(AuthorizeSpend, RefusesInvalidCertificate) {
    Rng rng(7);
    auto token = mint(rng);
    token.certificate.signature.s += 1;
    try {
        authorize_spend(token, ctx(1), issuer().pub());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidCertificate);
    }
}

TEST(VerifySpend, CertificateFromDifferentTokenFails) {
    Rng rng(8);
    auto a = mint(rng);
    auto b = mint(rng);
    auto auth = authorize_spend(a, ctx(1), issuer().pub());
    EXPECT_FALSE(verify_spend(a.id(), a.keys.verification(), b.certificate, auth, ctx(1),
                              issuer().pub()));
}

TEST(VerifySpend, SubstitutedVerificationKeyNeverAccepted) {
    Rng rng(9);
    auto token = mint(rng);
    auto auth = authorize_spend(token, ctx(1), issuer().pub());
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
        auto [keys, unused] = new_pretoken(4, 2025, denoms(), rng);
        // Attacker also re-signs the context with the substituted key.
        auto forged = auth;
        Writer w;
        w.str("cbdc/spend/v1").digest(token.id()).digest(auth.context_hash);
        forged.signature = keys.signing.sign(w.data());
        accepted += verify_spend(token.id(), keys.verification(), token.certificate, forged, ctx(1),
                                 issuer().pub())
                        ? 1
                        : 0;
    }
    EXPECT_EQ(accepted, 0);
}

TEST(VerifySpend, WrongIssuerKeyFails) {
    Rng rng(10);
    auto token = mint(rng);
    auto in = make_spend_input(token, ctx(1), issuer().pub());
    EXPECT_FALSE(verify_spend(in, ctx(1), other_issuer().pub()));
}

TEST(SpentSet, RecordsOnce) {
    SpentSet set;
    Rng rng(11);
    auto id = TokenId::from(rng.next_hash());
    EXPECT_TRUE(set.record_spent(id));
    EXPECT_FALSE(set.record_spent(id));
    EXPECT_EQ(set.size(), 1u);
}

TEST(SpentSet, ReplayOfTenThousandIdsIsAllRejected) {
    SpentSet set;
    Rng rng(12);
    std::vector<TokenId> ids;
    for (int i = 0; i < 10000; ++i) {
        ids.push_back(TokenId::from(rng.next_hash()));
        ASSERT_TRUE(set.record_spent(ids.back()));
    }
    int rejected = 0;
    for (const auto& id : ids) {
        rejected += set.record_spent(id) ? 0 : 1;
    }
    EXPECT_EQ(rejected, 10000);
    EXPECT_EQ(set.size(), 10000u);
}

TEST(SpendInput, SerializationRoundTrip) {
    Rng rng(13);
    auto token = mint(rng);
    auto in = make_spend_input(token, ctx(3), issuer().pub());
    Writer w;
    write_spend_input(w, in);
    Reader r(w.data());
    auto back = read_spend_input(r);
    r.expect_done();
    EXPECT_TRUE(verify_spend(back, ctx(3), issuer().pub()));
    Writer w2;
    write_spend_input(w2, back);
    EXPECT_EQ(w.data(), w2.data());
}

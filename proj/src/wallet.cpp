#include "cbdc/wallet.hpp"

#include "cbdc/error.hpp"
#include "cbdc/serialize.hpp"

#include <sodium.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>

namespace cbdc {
namespace {

constexpr std::string_view kFileMagic = "CBDCWAL1";
constexpr std::string_view kFileTag = "cbdc/wallet/v1";
// Above this many DP cells the selection falls back to largest-first.
constexpr std::size_t kMaxSelectionCells = 50'000'000;

}  // namespace

Wallet::Wallet(std::shared_ptr<const Genesis> genesis, Rng rng, TimeMs spend_delay)
    : genesis_(std::move(genesis)), rng_(std::move(rng)), spend_delay_(spend_delay) {}

const IssuerPublicKey& Wallet::key_for(Amount denomination) const {
    const auto* k = genesis_->issuers.find(denomination, genesis_->vintage);
    if (k == nullptr) {
        throw Error(Errc::UnknownKeyId, "no issuer key for denomination " + std::to_string(denomination));
    }
    return *k;
}

WithdrawalPlan Wallet::plan_withdrawal(Amount amount) {
    if (amount == 0) throw Error(Errc::UnrepresentableAmount, "amount 0");
    WithdrawalPlan plan;
    plan.amount = amount;
    plan.denominations = genesis_->denominations.greedy_split(amount);
    std::vector<Pending> pending;
    for (auto d : plan.denominations) {
        const auto& key = key_for(d);
        auto [keys, id] = new_pretoken(d, genesis_->vintage, genesis_->denominations, rng_);
        auto [blinded, factor] = blind(id.view(), key, rng_);
        plan.request.outputs.push_back(blinded);
        pending.push_back({std::move(keys), id, std::move(factor), std::move(blinded), d});
    }
    plan.session = next_session_++;
    sessions_.emplace(plan.session, std::move(pending));
    return plan;
}

Amount Wallet::finalize_withdrawal(SessionId session, const std::vector<BlindSignature>& signatures,
                                   TimeMs now) {
    auto it = sessions_.find(session);
    if (it == sessions_.end()) throw Error(Errc::NoPendingSession, std::to_string(session));
    auto& pending = it->second;
    if (signatures.size() != pending.size()) {
        throw Error(Errc::BadSignature, "expected " + std::to_string(pending.size()) + " signatures");
    }
    std::vector<HeldToken> fresh;
    Amount total = 0;
    for (std::size_t i = 0; i < pending.size(); ++i) {
        const auto& p = pending[i];
        const auto& key = genesis_->issuers.at(p.blinded.key_id);
        if (signatures[i].key_id != key.key_id) throw Error(Errc::BadSignature, "wrong issuer key");
        auto sig = unblind(signatures[i], p.factor, key);
        Certificate cert{p.id, key.key_id, sig};
        if (!verify_certificate(cert, key)) {
            throw Error(Errc::BadSignature, "certificate does not verify");
        }
        fresh.push_back({Token{p.keys, cert}, p.denomination, now});
        total += p.denomination;
    }
    for (auto& p : pending) {
        p.factor.r = 0;
    }
    sessions_.erase(it);
    std::move(fresh.begin(), fresh.end(), std::back_inserter(tokens_));
    return total;
}

void Wallet::abandon(SessionId session) {
    auto it = sessions_.find(session);
    if (it == sessions_.end()) return;
    for (auto& p : it->second) {
        p.factor.r = 0;
    }
    sessions_.erase(it);
}

std::vector<BlindingFactor> Wallet::pending_factors() const {
    std::vector<BlindingFactor> out;
    for (const auto& [id, list] : sessions_) {
        for (const auto& p : list) {
            out.push_back(p.factor);
        }
    }
    return out;
}

Amount Wallet::balance() const {
    Amount total = 0;
    for (const auto& t : tokens_) {
        total += t.denomination;
    }
    return total;
}

std::vector<const HeldToken*> Wallet::in_flight() const {
    std::vector<const HeldToken*> out;
    for (const auto& [id, list] : payments_) {
        for (const auto& t : list) {
            out.push_back(&t);
        }
    }
    return out;
}

// Bounded knapsack over denominations: least overshoot first, then fewest
// tokens. Within a denomination the oldest tokens go first.
std::vector<std::size_t> Wallet::select(Amount amount) const {
    std::map<Amount, std::vector<std::size_t>> groups;
    Amount largest = 0;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        groups[tokens_[i].denomination].push_back(i);
        largest = std::max(largest, tokens_[i].denomination);
    }
    for (auto& [d, idx] : groups) {
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
            return tokens_[a].received_at < tokens_[b].received_at;
        });
    }

    struct Item {
        Amount denomination;
        std::size_t count;
    };
    std::vector<Item> items;
    for (const auto& [d, idx] : groups) {
        std::size_t left = idx.size();
        for (std::size_t k = 1; left > 0; k *= 2) {
            auto take = std::min(k, left);
            items.push_back({d, take});
            left -= take;
        }
    }

    const std::size_t limit = amount + largest;
    if (items.size() * (limit + 1) <= kMaxSelectionCells) {
        constexpr auto kInf = std::numeric_limits<std::uint32_t>::max();
        std::vector<std::uint32_t> dp(limit + 1, kInf);
        std::vector<std::vector<bool>> took(items.size(), std::vector<bool>(limit + 1, false));
        dp[0] = 0;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto v = items[i].denomination * items[i].count;
            for (std::size_t s = limit; s >= v && v > 0; --s) {
                if (dp[s - v] == kInf) continue;
                auto c = dp[s - v] + static_cast<std::uint32_t>(items[i].count);
                if (c < dp[s]) {
                    dp[s] = c;
                    took[i][s] = true;
                }
            }
        }
        std::size_t best = limit + 1;
        for (std::size_t s = amount; s <= limit; ++s) {
            if (dp[s] != kInf) {
                best = s;
                break;
            }
        }
        if (best > limit) throw Error(Errc::InsufficientBalance, std::to_string(amount));
        std::map<Amount, std::size_t> per_denom;
        for (std::size_t i = items.size(), s = best; i-- > 0;) {
            if (took[i][s]) {
                per_denom[items[i].denomination] += items[i].count;
                s -= items[i].denomination * items[i].count;
            }
        }
        std::vector<std::size_t> out;
        for (const auto& [d, n] : per_denom) {
            const auto& idx = groups[d];
            out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
        }
        return out;
    }

    // Largest first, oldest first within a denomination.
    std::vector<std::size_t> out;
    Amount covered = 0;
    for (auto g = groups.rbegin(); g != groups.rend() && covered < amount; ++g) {
        for (auto i : g->second) {
            if (covered >= amount) break;
            out.push_back(i);
            covered += g->first;
        }
    }
    if (covered < amount) throw Error(Errc::InsufficientBalance, std::to_string(amount));
    return out;
}

PaymentBundle Wallet::make_payment(Amount amount, const Quote& quote, TimeMs now) {
    if (amount == 0) throw Error(Errc::UnrepresentableAmount, "amount 0");
    if (balance() < amount) {
        throw Error(Errc::InsufficientBalance, std::to_string(balance()) + " < " + std::to_string(amount));
    }
    auto picked = select(amount);
    std::sort(picked.begin(), picked.end());

    PaymentBundle b;
    std::vector<HeldToken> spent;
    TimeMs newest = 0;
    for (auto i : picked) {
        b.input_total += tokens_[i].denomination;
        newest = std::max(newest, tokens_[i].received_at);
        spent.push_back(tokens_[i]);
    }
    const auto ctx = quote.context(b.input_total);
    for (const auto& t : spent) {
        b.inputs.push_back(make_spend_input(t.token, ctx, genesis_->issuers.at(t.token.certificate.key_id)));
    }
    b.change_value = b.input_total - amount;
    if (b.change_value > 0) {
        auto plan = plan_withdrawal(b.change_value);
        b.change = std::move(plan.request.outputs);
        b.change_session = plan.session;
    }
    const TimeMs age = now >= newest ? now - newest : 0;
    if (spend_delay_ > 0 && age < spend_delay_) {
        b.risk_flag = true;
        risk_log_.push_back({now, amount, age});
    }

    for (auto it = picked.rbegin(); it != picked.rend(); ++it) {
        tokens_.erase(tokens_.begin() + static_cast<std::ptrdiff_t>(*it));
    }
    b.payment = next_session_++;
    payments_.emplace(b.payment, std::move(spent));
    return b;
}

PaymentBundle Wallet::respend(const PaymentBundle& bundle, const Quote& quote) {
    auto it = payments_.find(bundle.payment);
    if (it == payments_.end()) throw Error(Errc::NoPendingSession, "payment already settled");
    PaymentBundle b;
    b.payment = bundle.payment;
    b.input_total = bundle.input_total;
    const auto ctx = quote.context(b.input_total);
    for (const auto& t : it->second) {
        b.inputs.push_back(make_spend_input(t.token, ctx, genesis_->issuers.at(t.token.certificate.key_id)));
    }
    return b;
}

void Wallet::settle_payment(const PaymentBundle& bundle, bool accepted, bool tokens_spent) {
    if (!accepted && bundle.change_session != 0) abandon(bundle.change_session);
    auto it = payments_.find(bundle.payment);
    if (it == payments_.end()) return;
    if (!accepted && !tokens_spent) {
        std::move(it->second.begin(), it->second.end(), std::back_inserter(tokens_));
    }
    payments_.erase(it);
}

void Wallet::save(const std::filesystem::path& path, const Hash256& key) const {
    Writer w;
    w.str(kFileTag).u32(static_cast<std::uint32_t>(tokens_.size()));
    for (const auto& t : tokens_) {
        w.digest(t.token.keys.signing.seed());
        write_certificate(w, t.token.certificate);
        w.u64(t.received_at);
    }
    const auto& plain = w.data();

    Bytes out(kFileMagic.begin(), kFileMagic.end());
    std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce{};
    randombytes_buf(nonce.data(), nonce.size());
    out.insert(out.end(), nonce.begin(), nonce.end());
    Bytes cipher(plain.size() + crypto_secretbox_MACBYTES);
    crypto_secretbox_easy(cipher.data(), plain.data(), plain.size(), nonce.data(), key.bytes.data());
    out.insert(out.end(), cipher.begin(), cipher.end());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::Io, "cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error(Errc::Io, "short write to " + path.string());
}

Wallet Wallet::load(const std::filesystem::path& path, const Hash256& key,
                    std::shared_ptr<const Genesis> genesis, Rng rng, TimeMs spend_delay) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::Io, "cannot read " + path.string());
    Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto header = kFileMagic.size() + crypto_secretbox_NONCEBYTES;
    if (data.size() < header + crypto_secretbox_MACBYTES ||
        !std::equal(kFileMagic.begin(), kFileMagic.end(), data.begin())) {
        throw Error(Errc::Malformed, "not a wallet file");
    }
    Bytes plain(data.size() - header - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(plain.data(), data.data() + header, data.size() - header,
                                   data.data() + kFileMagic.size(), key.bytes.data()) != 0) {
        throw Error(Errc::BadSignature, "wallet file does not authenticate");
    }

    Wallet w(std::move(genesis), std::move(rng), spend_delay);
    Reader r(plain);
    if (r.str() != kFileTag) throw Error(Errc::Malformed, "wallet version");
    auto n = r.count(64);
    for (std::uint32_t i = 0; i < n; ++i) {
        TokenKeyPair keys{SigningKey::from_seed(r.digest<HashTag>())};
        auto cert = read_certificate(r);
        auto at = r.u64();
        const auto* issuer = w.genesis_->issuers.find(cert.key_id);
        if (issuer == nullptr || cert.token_id != token_id_of(keys.verification()) ||
            !verify_certificate(cert, *issuer)) {
            throw Error(Errc::InvalidCertificate, "stored token " + cert.token_id.short_hex());
        }
        w.tokens_.push_back({Token{std::move(keys), cert}, issuer->denomination, at});
    }
    r.expect_done();
    return w;
}

}  // namespace cbdc

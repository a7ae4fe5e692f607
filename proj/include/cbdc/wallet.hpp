#pragma once

#include "cbdc/blindsig.hpp"
#include "cbdc/crypto.hpp"
#include "cbdc/genesis.hpp"
#include "cbdc/protocol.hpp"
#include "cbdc/token.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace cbdc {

struct HeldToken {
    Token token;
    Amount denomination = 0;
    /// When the certificate was unblinded, for the spend-delay check.
    TimeMs received_at = 0;
};

/// Handle for a withdrawal (or incoming payment, or change) whose blind
/// signatures have not arrived yet. Local to the wallet, never transmitted.
using SessionId = std::uint64_t;

struct WithdrawalPlan {
    SessionId session = 0;
    std::vector<Amount> denominations;
    WithdrawalRequest request;
    Amount amount = 0;
};

struct PaymentBundle {
    /// Local handle for the spent tokens until the entry settles.
    SessionId payment = 0;
    std::vector<SpendInput> inputs;
    Amount input_total = 0;
    /// Overshoot returned as fresh blinded outputs; session is 0 when exact.
    std::vector<BlindedMessage> change;
    SessionId change_session = 0;
    Amount change_value = 0;
    /// Some selected token was younger than the spend delay.
    bool risk_flag = false;
};

struct RiskNote {
    TimeMs at = 0;
    Amount amount = 0;
    TimeMs youngest_age = 0;
};

/// Non-custodial wallet. Holds bearer tokens and the blinding factors of
/// unfinished sessions, and nothing that identifies it across sessions.
class Wallet {
public:
    /// `rng` must be private to this wallet. Fresh tokens use genesis.vintage.
    Wallet(std::shared_ptr<const Genesis> genesis, Rng rng, TimeMs spend_delay = 0);

    /// Greedy largest-first split with one fresh pre-token per piece. Throws
    /// UnrepresentableAmount (amount 0 included).
    WithdrawalPlan plan_withdrawal(Amount amount);
    /// Same mechanics, for tokens another party pays into this wallet.
    WithdrawalPlan plan_receive(Amount amount) { return plan_withdrawal(amount); }
    /// Unblinds and verifies every signature, then stores the tokens and
    /// erases the blinding factors. Throws NoPendingSession or BadSignature
    /// (nothing stored in that case).
    Amount finalize_withdrawal(SessionId session, const std::vector<BlindSignature>& signatures, TimeMs now);
    /// Drops a session whose entry was rejected.
    void abandon(SessionId session);

    /// Picks the token set with the least overshoot (then fewest tokens),
    /// authorizes each for `quote`, and blinds change for the overshoot.
    /// Throws InsufficientBalance.
    PaymentBundle make_payment(Amount amount, const Quote& quote, TimeMs now);
    /// Re-authorizes the in-flight tokens of `bundle` for another quote,
    /// without change. Used to script double-spend attempts.
    PaymentBundle respend(const PaymentBundle& bundle, const Quote& quote);
    /// Outcome of the entry carrying `bundle`. Tokens come back unless the
    /// entry was accepted or the tokens were found spent.
    void settle_payment(const PaymentBundle& bundle, bool accepted, bool tokens_spent);

    Amount balance() const;
    const std::vector<HeldToken>& tokens() const { return tokens_; }
    /// Tokens handed out in bundles that have not settled.
    std::vector<const HeldToken*> in_flight() const;
    std::size_t pending_sessions() const { return sessions_.size(); }
    /// Blinding factors of sessions still waiting for signatures.
    std::vector<BlindingFactor> pending_factors() const;
    const std::vector<RiskNote>& risk_log() const { return risk_log_; }
    TimeMs spend_delay() const { return spend_delay_; }

    /// Versioned, encrypted (XSalsa20-Poly1305) token store. No history.
    void save(const std::filesystem::path& path, const Hash256& key) const;
    static Wallet load(const std::filesystem::path& path, const Hash256& key,
                       std::shared_ptr<const Genesis> genesis, Rng rng, TimeMs spend_delay = 0);

private:
    struct Pending {
        TokenKeyPair keys;
        TokenId id;
        BlindingFactor factor;
        BlindedMessage blinded;
        Amount denomination = 0;
    };

    const IssuerPublicKey& key_for(Amount denomination) const;
    std::vector<std::size_t> select(Amount amount) const;

    std::shared_ptr<const Genesis> genesis_;
    Rng rng_;
    TimeMs spend_delay_ = 0;
    std::vector<HeldToken> tokens_;
    std::map<SessionId, std::vector<Pending>> sessions_;
    std::map<SessionId, std::vector<HeldToken>> payments_;
    SessionId next_session_ = 1;
    std::vector<RiskNote> risk_log_;
};

}  // namespace cbdc

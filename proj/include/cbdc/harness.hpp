#pragma once

#include "cbdc/centralbank.hpp"
#include "cbdc/genesis.hpp"
#include "cbdc/msb.hpp"
#include "cbdc/netsim.hpp"
#include "cbdc/regulator.hpp"
#include "cbdc/replica.hpp"
#include "cbdc/wallet.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace cbdc {

// ---- configuration ------------------------------------------------------

struct AccountSpec {
    std::string id;
    NodeId msb = 0;
    KycTier tier = KycTier::Basic;
    Amount balance = 0;
    /// Registered accounts have their commitment published in genesis.
    bool registered = true;
};

struct WalletSpec {
    std::string name;
    TimeMs spend_delay_ms = 0;
};

struct TopologyConfig {
    std::size_t validators = 5;
    std::vector<Amount> denominations = DenominationSet::powers_of_two(12).values();
    std::uint32_t vintage = 2025;
    unsigned key_bits = 512;
    Amount initial_reserve = 1'000'000;
    std::string issuer_label = "central-bank";
    PolicyConfig policy;
    std::vector<AccountSpec> accounts;
    std::vector<WalletSpec> wallets;
};

/// Throws ConfigError naming the offending field (as a JSON pointer).
TopologyConfig topology_from_json(const nlohmann::json& j);
PolicyConfig policy_from_json(const nlohmann::json& j, const std::string& where);
/// Parses text, reporting syntax errors with line and column.
nlohmann::json parse_json_text(std::string_view text, const std::string& source);
nlohmann::json read_json_file(const std::filesystem::path& path);

nlohmann::json genesis_to_json(const Genesis& g);
/// Checks the recorded genesis hash when present.
std::shared_ptr<const Genesis> genesis_from_json(const nlohmann::json& j);

/// Everything derived from a topology and a seed: the public genesis plus
/// the private keys the nodes need. Same inputs, same bytes.
struct Deployment {
    std::shared_ptr<const Genesis> genesis;
    std::vector<SigningKey> validator_keys;
    std::vector<Hash256> account_salts;
    std::shared_ptr<CentralBank> bank;
    EpochRecord epoch;
};

Deployment deploy(const TopologyConfig& topology, std::uint64_t seed);

/// Key of a wallet's private random stream. Secret to the wallet.
Hash256 wallet_seed(std::uint64_t seed, std::string_view name);

// ---- cluster ------------------------------------------------------------

struct ClusterOptions {
    SimConfig sim;
    std::size_t batch_size = 64;
    std::size_t window = 4;
    TimeMs timeout_ms = 500;
    /// Run the central bank as a non-voting observer (needed for issuance).
    bool bank_observer = true;
    LedgerOptions ledger;
    /// Directory for per-MSB record stores; none keeps them in memory.
    std::optional<std::filesystem::path> record_dir;
};

/// Validators (each an MSB with its replica), the central bank observer and
/// wallets, wired over one Simulator.
class Cluster {
public:
    using Settle = std::function<void(const LogRecord&)>;

    Cluster(const TopologyConfig& topology, std::uint64_t seed, ClusterOptions options);
    Cluster(const Cluster&) = delete;
    Cluster& operator=(const Cluster&) = delete;

    Simulator& sim() { return *sim_; }
    const Simulator& sim() const { return *sim_; }
    std::shared_ptr<const Genesis> genesis() const { return deployment_.genesis; }
    const Deployment& deployment() const { return deployment_; }
    std::size_t size() const { return replicas_.size(); }

    Replica& replica(NodeId id) { return *replicas_.at(id); }
    const Replica& replica(NodeId id) const { return *replicas_.at(id); }
    Msb& msb(NodeId id) { return *msbs_.at(id); }
    const Msb& msb(NodeId id) const { return *msbs_.at(id); }
    CentralBank& bank() { return *deployment_.bank; }
    const CentralBank& bank() const { return *deployment_.bank; }
    const Replica* bank_replica() const { return bank_replica_.get(); }

    Wallet& add_wallet(const std::string& name, TimeMs spend_delay = 0);
    Wallet& wallet(const std::string& name);
    const std::map<std::string, std::unique_ptr<Wallet>>& wallets() const { return wallets_; }
    /// MSB holding `account_id`; throws UnknownAccount.
    NodeId msb_of(const std::string& account_id) const;

    /// Hands the entry to `via`'s replica. `settle` runs once the central bank
    /// observer has committed the entry (its blind signatures are ready then).
    Verdict submit(NodeId via, const LedgerEntry& entry, Settle settle = {});
    std::size_t unsettled() const { return settle_.size(); }

    /// Validators that are neither equivocating nor corrupting.
    bool byzantine(NodeId id) const;
    /// First validator that is not Byzantine and not muted.
    NodeId reference() const;

    /// Safety, conservation and mirror consistency; empty when all hold.
    std::vector<std::string> check_invariants() const;
    /// Unspent certified value held by wallets (in flight included), per key.
    std::map<KeyId, Amount> wallet_outstanding() const;

private:
    Deployment deployment_;
    ClusterOptions options_;
    std::unique_ptr<Simulator> sim_;
    std::vector<std::unique_ptr<Replica>> replicas_;
    std::vector<std::unique_ptr<Msb>> msbs_;
    std::unique_ptr<Replica> bank_replica_;
    std::map<std::string, std::unique_ptr<Wallet>> wallets_;
    std::map<std::string, NodeId> account_home_;
    std::unordered_map<Hash256, Settle, DigestHash> settle_;
    std::uint64_t seed_ = 0;
};

// ---- scenarios ----------------------------------------------------------

enum class ActionKind { Withdraw, Deposit, Mediate, Disburse, DoubleSpend, ReserveExchange };

std::string_view to_string(ActionKind k) noexcept;

struct Action {
    ActionKind kind = ActionKind::Withdraw;
    TimeMs at = 0;
    std::string wallet;
    std::string payee;
    /// Withdraw: debited account. Deposit: credited account.
    std::string account;
    /// DoubleSpend: the two (or more) credited accounts, in order.
    std::vector<std::string> accounts;
    TimeMs gap_ms = 0;
    NodeId msb = 0;
    Amount amount = 0;
    bool id_info = false;
    bool verified = true;
    std::string claim;
    std::string treasury = "treasury";
    ReserveDirection direction = ReserveDirection::Fund;
    /// "commit", "reject", "reject:<code>", "error:<code>" or "one_commit".
    std::optional<std::string> expect;
};

/// A count, or a lower bound written as ">=n".
struct CountExpectation {
    std::uint64_t value = 0;
    bool at_least = false;
    bool holds(std::uint64_t n) const { return at_least ? n >= value : n == value; }
    std::string describe() const { return (at_least ? ">=" : "") + std::to_string(value); }
};

struct Expectations {
    std::map<std::string, Amount> account_balances;
    std::map<std::string, Amount> wallet_balances;
    std::map<std::string, CountExpectation> alerts;
    std::map<std::string, CountExpectation> rejects;
    std::optional<CountExpectation> accepted;
    /// Upper bound on views entered by the reference validator.
    std::optional<std::uint64_t> max_view;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    TopologyConfig topology;
    ClusterOptions cluster;
    std::vector<Action> actions;
    Expectations expect;
    /// Extra simulated time after the last action for commits to settle.
    TimeMs settle_ms = 60'000;
};

Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

/// Everything a wallet transmitted, split into fields, per session.
struct TranscriptMessage {
    std::string wallet;
    std::size_t session = 0;
    /// Session this one deliberately repeats tokens from (double spends).
    std::size_t linked_session = 0;
    std::string kind;
    Bytes bytes;
    std::vector<TranscriptField> fields;
};

struct ActionOutcome {
    std::size_t index = 0;
    ActionKind kind = ActionKind::Withdraw;
    /// "committed", "rejected:<code>", "error:<code>" or "pending"; one per
    /// submission (double spends have several).
    std::vector<std::string> results;
    std::vector<Hash256> entries;
};

struct RunOptions {
    /// Keep wallet messages, network payloads and secrets for privacy scans.
    bool capture_transcript = false;
    bool keep_trace = true;
};

struct RunResult {
    std::string name;
    bool passed = false;
    std::vector<std::string> failures;
    Hash256 state_hash;
    Hash256 chain_head;
    Hash256 trace_hash;
    std::uint64_t height = 0;
    std::string trace_text;
    std::vector<ActionOutcome> outcomes;
    Report report;
    std::vector<Alert> alerts;
    std::vector<LogRecord> log;
    Bytes audit_stream;
    nlohmann::json genesis;
    std::uint64_t max_view = 0;
    /// Deposit entry hash -> withdrawal entry hash of the same tokens, when a
    /// deposit spends exactly the tokens of one withdrawal. Test mode only.
    std::map<Hash256, Hash256> linkage_truth;
    /// Token value held by all wallets (in-flight included), per issuer key.
    std::map<KeyId, Amount> wallet_holdings;

    std::vector<TranscriptMessage> transcript;
    std::vector<Bytes> network;
    /// (label, bytes) that must never appear in a ledger entry or message.
    std::vector<std::pair<std::string, Bytes>> secrets;
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Finds secrets inside ledger entries, network payloads and wallet
/// messages, and fields shared between unrelated sessions of one wallet.
std::vector<std::string> scan_privacy(const RunResult& result);

/// Mixed random workload; any outcome is allowed, invariants must hold.
Scenario make_fuzz_scenario(std::uint64_t seed, std::size_t actions);
/// `deposits` single-token deposits, a fraction of them replayed; some
/// replays hit a second MSB at the same instant.
Scenario make_double_spend_scenario(std::uint64_t seed, std::size_t deposits, double duplicate_fraction);

// ---- benchmark ----------------------------------------------------------

struct BenchConfig {
    /// Wall-clock time spent processing; 0 gives an empty result.
    TimeMs duration_ms = 5000;
    std::size_t batch = 64;
    std::size_t validators = 4;
    std::uint64_t seed = 1;
};

struct BenchResult {
    std::uint64_t committed = 0;
    double seconds = 0;
    double rate = 0;
    std::uint64_t views = 0;
};

BenchResult run_bench(const BenchConfig& config);

}  // namespace cbdc

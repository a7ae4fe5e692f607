#pragma once

#include "cbdc/genesis.hpp"
#include "cbdc/ledger.hpp"
#include "cbdc/messages.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cbdc {

enum class AlertKind : std::uint8_t {
    InvalidDestination,
    DoubleSpendRate,
    WithdrawalVelocity,
    ByzantineEvidence,
};

std::string_view to_string(AlertKind k) noexcept;

struct Alert {
    AlertKind kind = AlertKind::InvalidDestination;
    NodeId msb = 0;
    /// Ledger height the alert points at; 0 when it is a rate over many entries.
    std::uint64_t height = 0;
    std::string detail;

    nlohmann::json to_json() const;
};

struct AlertConfig {
    /// DoubleSpend rejects over spend-bearing entries, per MSB.
    double double_spend_rate = 0.01;
    /// Attempted withdrawals per MSB per day; 0 means the genesis velocity cap.
    Amount withdrawal_velocity = 0;
};

struct MsbActivity {
    std::uint64_t entries = 0;
    std::uint64_t accepted = 0;
    std::map<std::string, std::uint64_t> rejects;
    /// Spent tokens redeemed through this MSB, and tokens it had issued.
    Amount value_in = 0;
    Amount value_out = 0;
    std::uint64_t spend_entries = 0;
    std::uint64_t double_spends = 0;
    /// Day index -> accepted plus velocity-rejected withdrawal value.
    std::map<std::uint64_t, Amount> attempted_withdrawals;

    std::uint64_t rejected() const { return entries - accepted; }
};

struct SupplyLine {
    KeyId key_id;
    Amount denomination = 0;
    std::uint32_t vintage = 0;
    Amount issued = 0;
    Amount redeemed = 0;
    Amount outstanding() const { return issued - redeemed; }
};

struct Report {
    std::uint64_t height = 0;
    Hash256 state_hash;
    Hash256 chain_head;
    std::vector<SupplyLine> supply;
    std::map<std::uint32_t, Amount> outstanding_by_vintage;
    Amount outstanding = 0;
    /// Submitter id (the central bank included) -> activity.
    std::map<NodeId, MsbActivity> activity;

    /// One JSON object per line: summary, supply, vintage and msb records.
    std::vector<nlohmann::json> lines() const;
};

/// Read-only replica fed by audit streams. Uses nothing but the stream and
/// the public genesis.
class AuditReplica {
public:
    explicit AuditReplica(std::shared_ptr<const Genesis> genesis, AlertConfig config = {});

    /// Records must continue from the current height without holes (throws
    /// GapDetected) and re-execute to the same outcome, state hash and
    /// chain hash (throws HashMismatch). Records at or below the current
    /// height are checked against the local chain and skipped.
    void ingest(const AuditBatch& batch);
    /// Keeps verified evidence once per (equivocator, view, seq). Returns
    /// false for evidence that does not verify.
    bool add_evidence(const EquivocationEvidence& evidence);

    std::uint64_t height() const { return ledger_.height(); }
    Hash256 state_hash() const { return ledger_.state_hash(); }
    const Hash256& chain_head() const { return ledger_.chain_head(); }
    const LedgerState& ledger() const { return ledger_; }

    Report report() const;
    std::vector<Alert> detect_anomalies() const;

private:
    void observe(const LogRecord& record);

    std::shared_ptr<const Genesis> genesis_;
    AlertConfig config_;
    LedgerState ledger_;
    std::map<NodeId, MsbActivity> activity_;
    std::vector<Alert> destination_alerts_;
    std::map<std::tuple<NodeId, std::uint64_t, std::uint64_t>, EquivocationEvidence> evidence_;
};

// Linkage attack. The adversary sees the ordered log: when each withdrawal
// and each deposit happened and for how much. Ground truth comes from the
// simulator in test mode only.

struct LinkObservation {
    Hash256 entry_hash;
    std::uint64_t height = 0;
    TimeMs time = 0;
    Amount amount = 0;
};

struct LinkObservations {
    std::vector<LinkObservation> withdrawals;
    std::vector<LinkObservation> deposits;
};

/// Accepted withdrawals and deposits, in log order.
LinkObservations linkage_observations(const std::vector<LogRecord>& log);

enum class LinkStrategy { EarliestAfter, Random };

std::string_view to_string(LinkStrategy s) noexcept;

/// For each deposit, the index of the withdrawal it is matched to. Every
/// withdrawal is used at most once; amounts must agree when possible.
std::vector<std::size_t> link(const LinkObservations& obs, LinkStrategy strategy, Rng& rng);

struct LinkageResult {
    std::vector<std::size_t> matching;
    std::size_t correct = 0;
    double accuracy = 0;
};

/// `truth` maps deposit entry hash to withdrawal entry hash.
LinkageResult linkage_attack(const LinkObservations& obs, LinkStrategy strategy,
                             const std::map<Hash256, Hash256>& truth, Rng& rng);

}  // namespace cbdc

#pragma once

#include "cbdc/types.hpp"

namespace cbdc {

/// Compliance limits. Account-level caps are enforced by each MSB; the
/// MSB-level velocity cap, the identification threshold and the fee schedule
/// are also checked by every validator during ledger apply.
struct PolicyConfig {
    Amount account_daily_withdrawal_cap = 1000;
    /// Applies to basic-tier accounts only; verified accounts are exempt.
    Amount account_daily_deposit_cap = 5000;
    /// Mediated transfers with gross value at or above this need identification.
    Amount id_threshold = 500;
    Amount msb_daily_withdrawal_cap = 10'000'000;
    Amount mediated_fee = 0;
    /// Extra fee when a mediated transfer converts between vintages.
    Amount vintage_exchange_fee = 0;
    TimeMs day_ms = kDayMs;

    /// Throws ConfigError when an invariant is broken.
    void validate() const;

    bool operator==(const PolicyConfig&) const = default;
};

}  // namespace cbdc

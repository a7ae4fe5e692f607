#pragma once

#include "cbdc/blindsig.hpp"
#include "cbdc/bytes.hpp"
#include "cbdc/crypto.hpp"
#include "cbdc/denomination.hpp"
#include "cbdc/policy.hpp"
#include "cbdc/types.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace cbdc {

struct ValidatorInfo {
    NodeId id = 0;
    std::string name;
    VerifyKey key;
    Amount initial_reserve = 0;
};

/// Public starting point shared by every replica, the central bank and the
/// regulator. Contains no private keys and no cleartext account ids.
struct Genesis {
    std::string protocol;
    std::string issuer_label = "central-bank";
    std::vector<ValidatorInfo> validators;
    VerifyKey central_bank_key;
    DenominationSet denominations;
    std::uint32_t vintage = 0;
    IssuerRegistry issuers;
    PolicyConfig policy;
    /// Salted account commitments registered by the MSBs at genesis.
    std::set<Hash256> registered_commitments;

    const ValidatorInfo* validator(NodeId id) const;
    std::size_t size() const { return validators.size(); }
    /// f = floor((N - 1) / 3).
    std::size_t max_faulty() const { return validators.empty() ? 0 : (validators.size() - 1) / 3; }
    /// ceil((N + f + 1) / 2): 2f + 1 when N = 3f + 1, and still large enough
    /// that two quorums share an honest replica when N is not of that form.
    std::size_t quorum() const { return (validators.size() + max_faulty() + 2) / 2; }

    Bytes encode() const;
    Hash256 hash() const;
};

inline constexpr std::size_t kMinValidators = 4;

}  // namespace cbdc

#include "cbdc/genesis.hpp"

#include "cbdc/error.hpp"
#include "cbdc/serialize.hpp"

#include <string>

namespace cbdc {

void PolicyConfig::validate() const {
    if (id_threshold == 0) {
        throw Error(Errc::ConfigError, "policy.id_threshold must be > 0");
    }
    if (day_ms == 0) {
        throw Error(Errc::ConfigError, "policy.day_ms must be > 0");
    }
}

const ValidatorInfo* Genesis::validator(NodeId id) const {
    if (id < validators.size() && validators[id].id == id) {
        return &validators[id];
    }
    for (const auto& v : validators) {
        if (v.id == id) return &v;
    }
    return nullptr;
}

Bytes Genesis::encode() const {
    Writer w;
    w.str("cbdc/genesis/v1").str(protocol).str(issuer_label);
    w.u32(static_cast<std::uint32_t>(validators.size()));
    for (const auto& v : validators) {
        w.u32(v.id).str(v.name).raw(v.key.view()).u64(v.initial_reserve);
    }
    w.raw(central_bank_key.view());
    w.u32(static_cast<std::uint32_t>(denominations.values().size()));
    for (auto d : denominations.values()) {
        w.u64(d);
    }
    w.u32(vintage);
    w.u32(static_cast<std::uint32_t>(issuers.size()));
    for (const auto& [id, key] : issuers.keys()) {
        w.digest(id).u64(key.denomination).u32(key.vintage).u32(key.bits);
        write_bigint(w, key.n, key.modulus_bytes());
        write_bigint(w, key.e, byte_length(key.e));
    }
    w.u64(policy.account_daily_withdrawal_cap)
        .u64(policy.account_daily_deposit_cap)
        .u64(policy.id_threshold)
        .u64(policy.msb_daily_withdrawal_cap)
        .u64(policy.mediated_fee)
        .u64(policy.vintage_exchange_fee)
        .u64(policy.day_ms);
    w.u32(static_cast<std::uint32_t>(registered_commitments.size()));
    for (const auto& c : registered_commitments) {
        w.digest(c);
    }
    return w.take();
}

Hash256 Genesis::hash() const { return sha256(encode()); }

}  // namespace cbdc

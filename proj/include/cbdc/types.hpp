#pragma once

#include <cstdint>

namespace cbdc {

/// Minor currency units.
using Amount = std::uint64_t;
/// Simulated milliseconds.
using TimeMs = std::uint64_t;
/// Validators/MSBs are numbered 0..N-1 in genesis order.
using NodeId = std::uint32_t;

inline constexpr NodeId kCentralBankId = 0xFFFF'FF00u;
inline constexpr TimeMs kDayMs = 86'400'000;

}  // namespace cbdc

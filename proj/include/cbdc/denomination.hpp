#pragma once

#include "cbdc/types.hpp"

#include <vector>

namespace cbdc {

class DenominationSet {
public:
    DenominationSet() = default;
    /// Values must be positive and distinct; stored ascending.
    explicit DenominationSet(std::vector<Amount> values);

    /// {1, 2, 4, ..., 2^max_exponent}.
    static DenominationSet powers_of_two(unsigned max_exponent = 12);

    bool contains(Amount d) const;
    const std::vector<Amount>& values() const { return values_; }
    Amount largest() const { return values_.empty() ? 0 : values_.back(); }
    bool empty() const { return values_.empty(); }

    /// Largest-first split; throws UnrepresentableAmount when the remainder
    /// cannot be covered (only possible without a unit denomination).
    std::vector<Amount> greedy_split(Amount amount) const;

    bool operator==(const DenominationSet&) const = default;

private:
    std::vector<Amount> values_;
};

}  // namespace cbdc

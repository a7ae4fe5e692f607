#include "cbdc/denomination.hpp"

#include "cbdc/error.hpp"

#include <algorithm>
#include <string>

namespace cbdc {

DenominationSet::DenominationSet(std::vector<Amount> values) : values_(std::move(values)) {
    std::sort(values_.begin(), values_.end());
    if (std::adjacent_find(values_.begin(), values_.end()) != values_.end()) {
        throw Error(Errc::InvalidDenomination, "duplicate denomination");
    }
    if (!values_.empty() && values_.front() == 0) {
        throw Error(Errc::InvalidDenomination, "denomination must be positive");
    }
}

DenominationSet DenominationSet::powers_of_two(unsigned max_exponent) {
    if (max_exponent > 62) {
        throw Error(Errc::InvalidDenomination, "exponent too large");
    }
    std::vector<Amount> values;
    for (unsigned i = 0; i <= max_exponent; ++i) {
        values.push_back(Amount{1} << i);
    }
    return DenominationSet(std::move(values));
}

bool DenominationSet::contains(Amount d) const {
    return std::binary_search(values_.begin(), values_.end(), d);
}

std::vector<Amount> DenominationSet::greedy_split(Amount amount) const {
    if (amount == 0) {
        throw Error(Errc::UnrepresentableAmount, "amount must be positive");
    }
    std::vector<Amount> parts;
    Amount left = amount;
    for (auto it = values_.rbegin(); it != values_.rend() && left > 0; ++it) {
        while (left >= *it) {
            parts.push_back(*it);
            left -= *it;
        }
    }
    if (left != 0) {
        throw Error(Errc::UnrepresentableAmount, std::to_string(amount));
    }
    return parts;
}

}  // namespace cbdc

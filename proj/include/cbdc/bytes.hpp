#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbdc {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

namespace detail {
/// Throws Malformed unless n == 32.
void check_digest_length(std::size_t n);
}  // namespace detail

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Fixed 32-byte value with a phantom tag so that hashes, key ids and token
/// ids cannot be mixed up by accident.
template <class Tag>
struct Digest32 {
    std::array<std::uint8_t, 32> bytes{};

    constexpr auto operator<=>(const Digest32&) const = default;

    ByteView view() const { return {bytes.data(), bytes.size()}; }
    std::string hex() const { return to_hex(view()); }
    std::string short_hex() const { return hex().substr(0, 16); }
    bool is_zero() const {
        return std::all_of(bytes.begin(), bytes.end(), [](auto b) { return b == 0; });
    }

    template <class Other>
    static Digest32 from(const Digest32<Other>& other) {
        return Digest32{other.bytes};
    }
    static Digest32 from_hex_string(std::string_view h);
};

using Hash256 = Digest32<struct HashTag>;
using KeyId = Digest32<struct KeyIdTag>;
using TokenId = Digest32<struct TokenIdTag>;

template <class Tag>
Digest32<Tag> Digest32<Tag>::from_hex_string(std::string_view h) {
    Digest32 out;
    auto raw = from_hex(h);
    detail::check_digest_length(raw.size());
    std::copy(raw.begin(), raw.end(), out.bytes.begin());
    return out;
}

struct DigestHash {
    template <class Tag>
    std::size_t operator()(const Digest32<Tag>& d) const noexcept {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(h); ++i) {
            h = (h << 8) | d.bytes[i];
        }
        return h;
    }
};

}  // namespace cbdc

#include "cbdc/serialize.hpp"

#include "cbdc/error.hpp"

namespace cbdc {

Writer& Writer::u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
}

Writer& Writer::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
}

Writer& Writer::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
}

Writer& Writer::raw(ByteView data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
    return *this;
}

Writer& Writer::bytes(ByteView data) {
    u32(static_cast<std::uint32_t>(data.size()));
    return raw(data);
}

ByteView Reader::raw(std::size_t n) {
    if (remaining() < n) {
        throw Error(Errc::Malformed, "truncated input");
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t Reader::u8() { return raw(1)[0]; }

std::uint32_t Reader::u32() {
    auto v = raw(4);
    return (std::uint32_t{v[0]} << 24) | (std::uint32_t{v[1]} << 16) | (std::uint32_t{v[2]} << 8) |
           std::uint32_t{v[3]};
}

std::uint64_t Reader::u64() {
    auto v = raw(8);
    std::uint64_t out = 0;
    for (auto b : v) {
        out = (out << 8) | b;
    }
    return out;
}

bool Reader::boolean() {
    auto v = u8();
    if (v > 1) {
        throw Error(Errc::Malformed, "boolean out of range");
    }
    return v == 1;
}

Bytes Reader::bytes() {
    auto n = u32();
    auto v = raw(n);
    return {v.begin(), v.end()};
}

std::string Reader::str() {
    auto n = u32();
    auto v = raw(n);
    return {v.begin(), v.end()};
}

std::uint32_t Reader::count(std::size_t min_element_size) {
    auto n = u32();
    if (min_element_size > 0 && n > remaining() / min_element_size) {
        throw Error(Errc::Malformed, "collection length exceeds input");
    }
    return n;
}

void Reader::expect_done() const {
    if (!done()) {
        throw Error(Errc::Malformed, "trailing bytes");
    }
}

}  // namespace cbdc

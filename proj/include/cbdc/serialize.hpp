#pragma once

#include "cbdc/bytes.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace cbdc {

// Canonical encoding: fixed field order, big-endian integers, u32
// length-prefixed byte strings. SHA-256 over these bytes is the hash used
// everywhere an entry or message is identified.
class Writer {
public:
    Writer& u8(std::uint8_t v);
    Writer& u32(std::uint32_t v);
    Writer& u64(std::uint64_t v);
    Writer& boolean(bool v) { return u8(v ? 1 : 0); }
    Writer& raw(ByteView data);
    Writer& bytes(ByteView data);
    Writer& str(std::string_view s) { return bytes(as_bytes(s)); }
    template <class Tag>
    Writer& digest(const Digest32<Tag>& d) {
        return raw(d.view());
    }

    const Bytes& data() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    bool boolean();
    ByteView raw(std::size_t n);
    Bytes bytes();
    std::string str();
    template <class Tag>
    Digest32<Tag> digest() {
        Digest32<Tag> d;
        auto v = raw(d.bytes.size());
        std::copy(v.begin(), v.end(), d.bytes.begin());
        return d;
    }
    /// Bounds a collection count by remaining input so hostile lengths fail fast.
    std::uint32_t count(std::size_t min_element_size = 1);

    bool done() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }
    void expect_done() const;

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

}  // namespace cbdc

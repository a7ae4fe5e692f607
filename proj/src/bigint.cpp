#include "cbdc/bigint.hpp"

#include "cbdc/error.hpp"

namespace cbdc {

std::size_t bit_length(const mpz_class& v) {
    if (v == 0) return 0;
    return mpz_sizeinbase(v.get_mpz_t(), 2);
}

Bytes bigint_to_bytes(const mpz_class& v, std::size_t width) {
    if (v < 0) {
        throw Error(Errc::Malformed, "negative big integer");
    }
    auto len = byte_length(v);
    if (len > width) {
        throw Error(Errc::Malformed, "big integer wider than field");
    }
    Bytes out(width, 0);
    if (len > 0) {
        std::size_t written = 0;
        mpz_export(out.data() + (width - len), &written, 1, 1, 1, 0, v.get_mpz_t());
    }
    return out;
}

mpz_class bigint_from_bytes(ByteView data) {
    mpz_class v;
    if (!data.empty()) {
        mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
    }
    return v;
}

mpz_class random_below(const mpz_class& bound, Rng& rng) {
    if (bound <= 0) {
        throw Error(Errc::Malformed, "random bound must be positive");
    }
    const auto bits = bit_length(bound);
    const auto nbytes = (bits + 7) / 8;
    const auto excess = nbytes * 8 - bits;
    Bytes buf(nbytes);
    for (;;) {
        rng.fill(buf);
        buf[0] &= static_cast<std::uint8_t>(0xff >> excess);
        auto v = bigint_from_bytes(buf);
        if (v < bound) {
            return v;
        }
    }
}

std::string bigint_to_hex(const mpz_class& v) { return v.get_str(16); }

mpz_class bigint_from_hex(std::string_view hex) {
    mpz_class v;
    if (hex.empty() || v.set_str(std::string(hex), 16) != 0) {
        throw Error(Errc::Malformed, "invalid big integer hex");
    }
    return v;
}

void write_bigint(Writer& w, const mpz_class& v, std::size_t width) {
    w.bytes(bigint_to_bytes(v, width));
}

mpz_class read_bigint(Reader& r) {
    auto raw = r.bytes();
    return bigint_from_bytes(raw);
}

}  // namespace cbdc

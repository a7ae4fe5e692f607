#pragma once

#include "cbdc/bytes.hpp"
#include "cbdc/crypto.hpp"
#include "cbdc/serialize.hpp"

#include <gmpxx.h>

#include <cstddef>

namespace cbdc {

/// Big-endian, left-padded to exactly `width` bytes.
Bytes bigint_to_bytes(const mpz_class& v, std::size_t width);
mpz_class bigint_from_bytes(ByteView data);

std::size_t bit_length(const mpz_class& v);
inline std::size_t byte_length(const mpz_class& v) { return (bit_length(v) + 7) / 8; }

/// Uniform in [0, bound) by masked rejection sampling.
mpz_class random_below(const mpz_class& bound, Rng& rng);

std::string bigint_to_hex(const mpz_class& v);
mpz_class bigint_from_hex(std::string_view hex);

void write_bigint(Writer& w, const mpz_class& v, std::size_t width);
mpz_class read_bigint(Reader& r);

}  // namespace cbdc

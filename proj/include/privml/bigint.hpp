#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace privml {

using BigInt = mpz_class;

/// 2^e as a big integer.
BigInt pow2(std::size_t e);

/// Number of significant bits of |v| (0 for v == 0).
std::size_t bit_length(const BigInt& v);

/// Bit i of a non-negative integer.
bool test_bit(const BigInt& v, std::size_t i);

/// floor(a / 2^e), rounding toward negative infinity.
BigInt floor_shift(const BigInt& a, std::size_t e);

/// Least non-negative residue of a modulo m (m > 0).
BigInt mod_floor(const BigInt& a, const BigInt& m);

/// Big-endian encoding of a non-negative value into exactly `width` bytes.
/// Throws RangeError if the value does not fit.
std::vector<std::uint8_t> to_bytes_be(const BigInt& v, std::size_t width);

/// Minimal big-endian encoding (empty for zero).
std::vector<std::uint8_t> to_bytes_be(const BigInt& v);

BigInt from_bytes_be(std::span<const std::uint8_t> bytes);

/// Parses a base-10 integer with optional leading '-'. Throws DecodeError.
BigInt parse_decimal(const std::string& text);

std::string to_decimal(const BigInt& v);

int sign_of(const BigInt& v);

}  // namespace privml

#include "privml/bigint.hpp"

#include "privml/errors.hpp"

namespace privml {

BigInt pow2(std::size_t e) {
  BigInt r;
  mpz_setbit(r.get_mpz_t(), e);
  return r;
}

std::size_t bit_length(const BigInt& v) {
  if (v == 0) return 0;
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

bool test_bit(const BigInt& v, std::size_t i) {
  return mpz_tstbit(v.get_mpz_t(), i) != 0;
}

BigInt floor_shift(const BigInt& a, std::size_t e) {
  BigInt r;
  mpz_fdiv_q_2exp(r.get_mpz_t(), a.get_mpz_t(), e);
  return r;
}

BigInt mod_floor(const BigInt& a, const BigInt& m) {
  BigInt r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

std::vector<std::uint8_t> to_bytes_be(const BigInt& v, std::size_t width) {
  if (v < 0) throw RangeError("cannot encode a negative integer as bytes");
  std::size_t needed = (bit_length(v) + 7) / 8;
  if (needed > width) {
    throw RangeError("integer needs " + std::to_string(needed) +
                     " bytes, field is " + std::to_string(width));
  }
  std::vector<std::uint8_t> out(width, 0);
  if (needed > 0) {
    std::size_t count = 0;
    mpz_export(out.data() + (width - needed), &count, 1, 1, 1, 0, v.get_mpz_t());
  }
  return out;
}

std::vector<std::uint8_t> to_bytes_be(const BigInt& v) {
  return to_bytes_be(v, (bit_length(v) + 7) / 8);
}

BigInt from_bytes_be(std::span<const std::uint8_t> bytes) {
  BigInt r;
  if (!bytes.empty()) {
    mpz_import(r.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return r;
}

BigInt parse_decimal(const std::string& text) {
  std::size_t start = (!text.empty() && text[0] == '-') ? 1 : 0;
  if (text.size() == start) throw DecodeError("empty integer literal");
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') {
      throw DecodeError("not a decimal integer: '" + text + "'");
    }
  }
  return BigInt(text, 10);
}

std::string to_decimal(const BigInt& v) { return v.get_str(10); }

int sign_of(const BigInt& v) { return sgn(v); }

}  // namespace privml

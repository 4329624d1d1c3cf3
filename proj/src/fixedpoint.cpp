#include "privml/fixedpoint.hpp"

#include <cmath>
#include <cstdint>

#include "privml/errors.hpp"

namespace privml::fixedpoint {

BigInt encode(double x, std::size_t precision) {
  if (!std::isfinite(x)) throw RangeError("fixed-point encode: value is not finite");
  if (x == 0.0) return 0;

  // x = mantissa * 2^exponent exactly, with |mantissa| < 2^53.
  int exponent = 0;
  double fraction = std::frexp(x, &exponent);
  auto mantissa = static_cast<std::int64_t>(std::ldexp(fraction, 53));
  exponent -= 53;

  BigInt m(static_cast<long>(mantissa));
  long shift = static_cast<long>(precision) + exponent;
  BigInt out;
  if (shift >= 0) {
    mpz_mul_2exp(out.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
  } else {
    mpz_fdiv_q_2exp(out.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(-shift));
  }
  return out;
}

double decode(const BigInt& z, std::size_t precision) {
  if (z == 0) return 0.0;
  long exponent = 0;
  double d = mpz_get_d_2exp(&exponent, z.get_mpz_t());
  return std::ldexp(d, static_cast<int>(exponent - static_cast<long>(precision)));
}

BigInt mul_rescale(const BigInt& z1, const BigInt& z2, std::size_t precision) {
  return floor_shift(z1 * z2, precision);
}

}  // namespace privml::fixedpoint

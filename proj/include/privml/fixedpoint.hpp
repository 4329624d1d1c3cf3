#pragma once

#include <cstddef>

#include "privml/bigint.hpp"

namespace privml::fixedpoint {

/// Default bit-precision, the number of significant bits of an IEEE-754 double.
inline constexpr std::size_t kDefaultPrecision = 53;

/// floor(x * 2^precision), computed exactly from the binary value of x.
/// Throws RangeError for NaN or infinities.
BigInt encode(double x, std::size_t precision);

/// z / 2^precision as a double (truncated to the nearest representable value
/// toward zero when z has more than 53 significant bits).
double decode(const BigInt& z, std::size_t precision);

/// floor(z1 * z2 / 2^precision): product of two values at the same scale,
/// brought back to that scale.
BigInt mul_rescale(const BigInt& z1, const BigInt& z2, std::size_t precision);

/// A scaled integer together with its bit-precision.
struct Value {
  BigInt z;
  std::size_t precision = kDefaultPrecision;

  static Value from_real(double x, std::size_t precision) {
    return Value{encode(x, precision), precision};
  }
  double to_real() const { return decode(z, precision); }
};

}  // namespace privml::fixedpoint

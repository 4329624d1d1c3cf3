#include <cmath>
#include <limits>

#include <doctest.h>
#include <gmpxx.h>

#include "privml/bigint.hpp"
#include "privml/errors.hpp"
#include "privml/fixedpoint.hpp"
#include "support.hpp"

using namespace privml;
using privml::fixedpoint::decode;
using privml::fixedpoint::encode;
using privml::fixedpoint::mul_rescale;

namespace {

// floor(x * 2^p) through exact rationals.
BigInt rational_floor(double x, std::size_t p) {
  mpq_class q(x);
  q *= mpq_class(pow2(p));
  BigInt out;
  mpz_fdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

}  // namespace

TEST_CASE("encode matches known values") {
  CHECK(encode(0.3, 10) == 307);
  CHECK(encode(-0.3, 10) == -308);
  CHECK(encode(0.0, 53) == 0);
  CHECK(encode(1.0, 53) == pow2(53));
  CHECK(encode(-1.0, 10) == -1024);
  CHECK(encode(0.5, 0) == 0);
  CHECK(encode(-0.5, 0) == -1);
}

TEST_CASE("mul_rescale matches known value") {
  CHECK(mul_rescale(encode(0.3, 10), encode(0.7, 10), 10) == 214);
  CHECK(mul_rescale(-307, 716, 10) == -215);
}

TEST_CASE("encode rejects non-finite input") {
  CHECK_THROWS_AS(encode(std::nan(""), 10), RangeError);
  CHECK_THROWS_AS(encode(std::numeric_limits<double>::infinity(), 10), RangeError);
}

TEST_CASE("encode agrees with exact rational floor") {
  auto& rng = test::rng();
  for (int i = 0; i < 2000; ++i) {
    BigInt num = uniform_between(rng, -(BigInt(1) << 40), BigInt(1) << 40);
    double x = std::ldexp(num.get_d(), -37);
    for (std::size_t p : {0u, 1u, 10u, 20u, 53u, 80u}) {
      REQUIRE(encode(x, p) == rational_floor(x, p));
    }
  }
}

TEST_CASE("decode inverts encode for dyadic values") {
  for (double x : {0.0, 0.5, -0.25, 0.75, -1.0, 0.123046875}) {
    CHECK(decode(encode(x, 20), 20) == x);
  }
  CHECK(decode(BigInt(307), 10) == doctest::Approx(0.2998046875));
}

TEST_CASE("encode error is below one ulp of the scale") {
  for (double x : {0.1, -0.1, 0.3, 0.999, -0.7}) {
    double back = decode(encode(x, 30), 30);
    CHECK(back <= x);
    CHECK(x - back < std::ldexp(1.0, -30));
  }
}

TEST_CASE("Value round trip") {
  auto v = fixedpoint::Value::from_real(0.3, 10);
  CHECK(v.z == 307);
  CHECK(v.to_real() == doctest::Approx(0.2998046875));
}

TEST_CASE("bigint helpers") {
  CHECK(bit_length(BigInt(0)) == 0);
  CHECK(bit_length(BigInt(255)) == 8);
  CHECK(bit_length(BigInt(-256)) == 9);
  CHECK(floor_shift(BigInt(-5), 1) == -3);
  CHECK(floor_shift(BigInt(5), 1) == 2);
  CHECK(mod_floor(BigInt(-7), BigInt(5)) == 3);
  CHECK(test_bit(BigInt(10), 1));
  CHECK_FALSE(test_bit(BigInt(10), 2));
  CHECK(parse_decimal("-12345678901234567890") == BigInt("-12345678901234567890"));
  CHECK_THROWS_AS(parse_decimal("12a"), DecodeError);
  CHECK(to_decimal(BigInt(-42)) == "-42");
  BigInt v("123456789012345678901234567890");
  CHECK(from_bytes_be(to_bytes_be(v)) == v);
  CHECK(to_bytes_be(BigInt(1), 4) == std::vector<std::uint8_t>{0, 0, 0, 1});
  CHECK_THROWS_AS(to_bytes_be(BigInt(256), 1), RangeError);
  CHECK(sign_of(BigInt(-3)) == -1);
  CHECK(sign_of(BigInt(0)) == 0);
}

TEST_CASE("uniform_between stays in range and hits the ends") {
  auto& rng = test::rng();
  bool lo = false, hi = false;
  for (int i = 0; i < 2000; ++i) {
    BigInt v = uniform_between(rng, BigInt(-3), BigInt(3));
    REQUIRE(v >= -3);
    REQUIRE(v <= 3);
    lo |= v == -3;
    hi |= v == 3;
  }
  CHECK(lo);
  CHECK(hi);
}

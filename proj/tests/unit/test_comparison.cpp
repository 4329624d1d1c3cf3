#include <doctest.h>

#include "privml/comparison.hpp"
#include "privml/errors.hpp"
#include "support.hpp"

using namespace privml;
using namespace privml::comparison;

namespace {

BigInt floor_div(const BigInt& a, const BigInt& n) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t());
  return q;
}

bool compare(const BigInt& mu, const BigInt& eta, std::size_t ell, bool delta_e) {
  const auto& k = test::client_keys();
  auto& rng = test::rng();
  auto req = bit_owner_request(k.pub, mu, ell, rng);
  auto resp = evaluator_respond(k.pub, req, eta, delta_e, rng);
  return bit_owner_finish(k.sec, resp, ell) ^ delta_e;
}

}  // namespace

TEST_CASE("floor of a difference identity") {
  for (int n : {2, 4, 8}) {
    for (int a = 0; a < 64; ++a) {
      for (int b = 0; b < 64; ++b) {
        BigInt A(a), B(b), N(n);
        BigInt lhs = floor_div(A - B, N);
        BigInt rhs = floor_div(A, N) - floor_div(B, N) + floor_div(BigInt(a % n - b % n), N);
        REQUIRE(lhs == rhs);
      }
    }
  }
}

TEST_CASE("comparison as a floor identity") {
  const BigInt n(16);
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      REQUIRE(BigInt(b <= a ? 1 : 0) == 1 + floor_div(BigInt(a - b), n));
    }
  }
}

TEST_CASE("exhaustive comparison at three bits") {
  for (int mu = 0; mu < 8; ++mu) {
    for (int eta = 0; eta < 8; ++eta) {
      for (bool d : {false, true}) {
        REQUIRE(compare(BigInt(mu), BigInt(eta), 3, d) == (mu <= eta));
      }
    }
  }
}

TEST_CASE("random comparisons at 40 bits") {
  auto& rng = test::rng();
  for (int i = 0; i < 20; ++i) {
    BigInt mu = random_bits(rng, 40), eta = random_bits(rng, 40);
    if (i == 0) eta = mu;
    bool d = random_bit(rng);
    REQUIRE(compare(mu, eta, 40, d) == (mu <= eta));
  }
}

TEST_CASE("response has l+1 values, at most one zero") {
  const auto& k = test::client_keys();
  auto& rng = test::rng();
  auto req = bit_owner_request(k.pub, BigInt(5), 4, rng);
  CHECK(req.bit_length() == 4);
  auto resp = evaluator_respond(k.pub, req, BigInt(9), false, rng);
  REQUIRE(resp.blinded_values.size() == 5);
  int zeros = 0;
  for (const auto& c : resp.blinded_values) zeros += k.sec.decrypt(c) == 0;
  CHECK(zeros <= 1);
}

TEST_CASE("bit owner rejects malformed responses") {
  const auto& k = test::client_keys();
  auto& rng = test::rng();
  ComparisonResponse two_zeros;
  for (int i = 0; i < 4; ++i) two_zeros.blinded_values.push_back(k.pub.encrypt(BigInt(i < 2 ? 0 : 7), rng));
  CHECK_THROWS_AS(bit_owner_finish(k.sec, two_zeros, 3), ProtocolViolation);
  ComparisonResponse short_resp;
  short_resp.blinded_values.push_back(k.pub.encrypt(BigInt(1), rng));
  CHECK_THROWS_AS(bit_owner_finish(k.sec, short_resp, 3), ProtocolViolation);
}

TEST_CASE("out-of-range operands are rejected") {
  const auto& k = test::client_keys();
  auto& rng = test::rng();
  CHECK_THROWS_AS(bit_owner_request(k.pub, BigInt(8), 3, rng), RangeError);
  CHECK_THROWS_AS(bit_owner_request(k.pub, BigInt(-1), 3, rng), RangeError);
  auto req = bit_owner_request(k.pub, BigInt(3), 3, rng);
  CHECK_THROWS_AS(evaluator_respond(k.pub, req, BigInt(8), false, rng), RangeError);
}

#include <cmath>
#include <map>

#include <doctest.h>

#include "privml/errors.hpp"
#include "privml/masking.hpp"
#include "support.hpp"

using namespace privml;
using namespace privml::masking;

namespace {

BigInt signed_mod(const BigInt& v, const BigInt& m) {
  BigInt r = mod_floor(v, m);
  BigInt ceil_half = (m + 1) / 2;
  return r < ceil_half ? r : BigInt(r - m);
}

}  // namespace

TEST_CASE("core capacity inequality") {
  // M >= 2^ell (2^kappa + 1) - 1 with ell = 3, kappa = 2: 39.
  CHECK(core_capacity_ok(BigInt(39), 3, 2));
  CHECK_FALSE(core_capacity_ok(BigInt(38), 3, 2));
  CHECK_THROWS_AS(require_core_capacity(BigInt(38), 3, 2), ConfigError);
  CHECK(max_core_ell(BigInt(39), 2) == 3);
  CHECK(max_core_ell(BigInt(1), 2) == -1);
  CHECK(core_masked_max(3, 2) == 7 + 31);
}

TEST_CASE("max_core_ell is the largest admissible ell") {
  auto& rng = test::rng();
  for (int i = 0; i < 200; ++i) {
    BigInt m = uniform_between(rng, BigInt(1), BigInt(1) << 30);
    std::size_t kappa = uniform_index(rng, 10);
    long e = max_core_ell(m, kappa);
    if (e >= 0) REQUIRE(core_capacity_ok(m, e, kappa));
    REQUIRE_FALSE(core_capacity_ok(m, e + 1, kappa));
  }
}

TEST_CASE("2048-bit keys admit the production-scale ell") {
  BigInt m = (BigInt(1) << 2047) + 1;
  CHECK(core_capacity_ok(m, 111, 95));
  CHECK(max_core_ell(m, 95) == 1951);
}

TEST_CASE("core masks cover the declared range") {
  auto& rng = test::rng();
  for (int i = 0; i < 500; ++i) {
    BigInt mu = sample_core_mask(rng, 4, 3);
    REQUIRE(mu >= 15);
    REQUIRE(mu < 128);
  }
}

TEST_CASE("heuristic interval bounds") {
  // ceil(100/2) = 50, B + 1 = 16: floor(50/16) = 3, ceil(50/16) = 4.
  auto iv = heuristic_interval(BigInt(100), BigInt(15));
  CHECK(iv.lo == -3);
  CHECK(iv.hi == 3);
  CHECK(iv.size() == 7);
  auto ceil_iv = heuristic_interval_ceil(BigInt(100), BigInt(15));
  CHECK(ceil_iv.lo == -4);
  CHECK(ceil_iv.hi == 3);
  CHECK(heuristic_capacity_ok(iv, 2));
  CHECK_FALSE(heuristic_capacity_ok(iv, 3));
  CHECK_THROWS_AS(require_heuristic_capacity(iv, 3), ConfigError);
}

TEST_CASE("ceiling interval admits a wrapping pair") {
  // M = 100, B = 15, lambda = -4, mu = -3, t = 15: lambda t + mu = -63 wraps to 37.
  const BigInt m(100);
  auto ceil_iv = heuristic_interval_ceil(m, BigInt(15));
  REQUIRE(ceil_iv.contains(BigInt(-4)));
  REQUIRE(heuristic_pair_ok(BigInt(-4), BigInt(-3)));
  BigInt t_star = signed_mod(BigInt(-4) * 15 + (-3), m);
  CHECK(t_star == 37);
  // After the (-1)^delta correction the client would read -37.
  CHECK(sign_of(-t_star) != sign_of(BigInt(15)));
  CHECK_FALSE(heuristic_interval(m, BigInt(15)).contains(BigInt(-4)));
}

TEST_CASE("heuristic pair constraints") {
  CHECK(heuristic_pair_ok(BigInt(3), BigInt(0)));
  CHECK(heuristic_pair_ok(BigInt(3), BigInt(2)));
  CHECK_FALSE(heuristic_pair_ok(BigInt(3), BigInt(3)));
  CHECK_FALSE(heuristic_pair_ok(BigInt(3), BigInt(-1)));
  CHECK_FALSE(heuristic_pair_ok(BigInt(-3), BigInt(0)));
  CHECK(heuristic_pair_ok(BigInt(-3), BigInt(-2)));
  CHECK_FALSE(heuristic_pair_ok(BigInt(-1), BigInt(0)));
  CHECK_FALSE(heuristic_pair_ok(BigInt(0), BigInt(0)));
}

TEST_CASE("sampled heuristic masks satisfy the constraints") {
  auto& rng = test::rng();
  auto iv = heuristic_interval(BigInt(1009), BigInt(15));
  std::map<long, int> seen;
  for (int i = 0; i < 3000; ++i) {
    auto mk = sample_heuristic_masks(rng, iv);
    REQUIRE(iv.contains(mk.lambda));
    REQUIRE(heuristic_pair_ok(mk.lambda, mk.mu));
    REQUIRE(mk.negative == (mk.lambda < 0));
    ++seen[mk.lambda.get_si()];
  }
  // lambda = -1 admits no mu; every other nonzero lambda occurs.
  CHECK(seen.count(-1) == 0);
  CHECK(seen.count(0) == 0);
  CHECK(seen.size() == static_cast<std::size_t>(iv.size().get_si() - 2));
  auto inv = sample_heuristic_masks(rng, iv, BigInt(9));
  CHECK(mod_floor(inv.lambda, BigInt(3)) != 0);
}

TEST_CASE("dual-mode masked value is uniform") {
  // Chi-square goodness of fit over the toy message set.
  auto& rng = test::rng();
  const BigInt m(1009);
  const long M = 1009;
  const int draws = 100000;
  std::vector<int> counts(M, 0);
  const BigInt t(-123);
  for (int i = 0; i < draws; ++i) {
    BigInt mu = sample_signed_message(rng, m);
    REQUIRE(mu >= -(m / 2));
    REQUIRE(mu <= (m + 1) / 2 - 1);
    ++counts[mod_floor(t + mu, m).get_si()];
  }
  double expected = static_cast<double>(draws) / M;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  double df = M - 1;
  CHECK(chi2 < df + 5 * std::sqrt(2 * df));
}

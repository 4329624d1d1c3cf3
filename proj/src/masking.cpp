#include "privml/masking.hpp"

#include "privml/errors.hpp"

namespace privml::masking {

BigInt bound_for_bits(std::size_t ell) { return pow2(ell) - 1; }

bool core_capacity_ok(const BigInt& modulus, std::size_t ell, std::size_t kappa) {
  BigInt needed = pow2(ell) * (pow2(kappa) + 1) - 1;
  return modulus >= needed;
}

void require_core_capacity(const BigInt& modulus, std::size_t ell, std::size_t kappa) {
  if (!core_capacity_ok(modulus, ell, kappa)) {
    throw ConfigError("message space too small: need M >= 2^" + std::to_string(ell) +
                      " (2^" + std::to_string(kappa) + " + 1) - 1, have a " +
                      std::to_string(bit_length(modulus)) + "-bit modulus");
  }
}

long max_core_ell(const BigInt& modulus, std::size_t kappa) {
  long best = -1;
  for (std::size_t ell = 0; ell <= bit_length(modulus); ++ell) {
    if (!core_capacity_ok(modulus, ell, kappa)) break;
    best = static_cast<long>(ell);
  }
  return best;
}

BigInt sample_core_mask(RandomSource& rng, std::size_t ell, std::size_t kappa) {
  return uniform_between(rng, pow2(ell) - 1, pow2(ell + kappa) - 1);
}

BigInt core_masked_max(std::size_t ell, std::size_t kappa) {
  return (pow2(ell) - 1) + (pow2(ell + kappa) - 1);
}

BigInt sample_signed_message(RandomSource& rng, const BigInt& modulus) {
  BigInt lo = -(modulus / 2);
  BigInt hi = (modulus + 1) / 2 - 1;
  return uniform_between(rng, lo, hi);
}

HeuristicInterval heuristic_interval(const BigInt& modulus, const BigInt& bound) {
  BigInt half = (modulus + 1) / 2;
  BigInt top = half / (bound + 1);
  return HeuristicInterval{-top, top};
}

HeuristicInterval heuristic_interval_ceil(const BigInt& modulus, const BigInt& bound) {
  BigInt half = (modulus + 1) / 2;
  BigInt top = half / (bound + 1);
  BigInt ceil_top;
  mpz_cdiv_q(ceil_top.get_mpz_t(), half.get_mpz_t(), BigInt(bound + 1).get_mpz_t());
  return HeuristicInterval{-ceil_top, top};
}

bool heuristic_capacity_ok(const HeuristicInterval& interval, std::size_t kappa) {
  return interval.size() > pow2(kappa);
}

void require_heuristic_capacity(const HeuristicInterval& interval, std::size_t kappa) {
  if (!heuristic_capacity_ok(interval, kappa)) {
    throw ConfigError("heuristic mask interval has " + std::to_string(bit_length(interval.size())) +
                      "-bit size, need more than 2^" + std::to_string(kappa) + " elements");
  }
}

bool heuristic_pair_ok(const BigInt& lambda, const BigInt& mu) {
  if (lambda == 0) return false;
  if (abs(mu) >= abs(lambda)) return false;
  return (lambda > 0) == (mu >= 0);
}

HeuristicMasks sample_heuristic_masks(RandomSource& rng, const HeuristicInterval& interval,
                                      const BigInt& unit_modulus) {
  if (interval.lo >= -1 && interval.hi < 1) {
    throw ConfigError("heuristic mask interval admits no (lambda, mu) pair");
  }
  for (;;) {
    BigInt lambda = uniform_between(rng, interval.lo, interval.hi);
    // lambda = -1 admits no mu: |mu| < 1 forces mu = 0, whose sign is +1.
    if (lambda == 0 || lambda == -1) continue;
    if (unit_modulus != 0) {
      BigInt g;
      mpz_gcd(g.get_mpz_t(), lambda.get_mpz_t(), unit_modulus.get_mpz_t());
      if (g != 1) continue;
    }
    HeuristicMasks out;
    out.lambda = lambda;
    out.negative = lambda < 0;
    out.mu = out.negative ? uniform_between(rng, lambda + 1, BigInt(-1))
                          : uniform_between(rng, BigInt(0), lambda - 1);
    return out;
  }
}

}  // namespace privml::masking

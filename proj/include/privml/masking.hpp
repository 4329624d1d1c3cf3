#pragma once

#include <cstddef>

#include "privml/bigint.hpp"
#include "privml/random.hpp"

/// Masks shared by the linear-model and network protocols, and the sizing
/// rules that keep masked values from wrapping around the message space.
namespace privml::masking {

/// Default statistical security parameter.
inline constexpr std::size_t kDefaultKappa = 95;

/// B = 2^ell - 1.
BigInt bound_for_bits(std::size_t ell);

/// Message-space sizing for the comparison-based protocols:
/// M >= 2^ell (2^kappa + 1) - 1.
bool core_capacity_ok(const BigInt& modulus, std::size_t ell, std::size_t kappa);
/// Throws ConfigError naming the violated inequality.
void require_core_capacity(const BigInt& modulus, std::size_t ell, std::size_t kappa);
/// Largest ell with core_capacity_ok, or -1 when even ell = 0 fails.
long max_core_ell(const BigInt& modulus, std::size_t kappa);

/// Mask mu uniform in [2^ell - 1, 2^(ell+kappa)).
BigInt sample_core_mask(RandomSource& rng, std::size_t ell, std::size_t kappa);
/// Largest possible honest t* = t + mu, i.e. (2^ell - 1) + (2^(ell+kappa) - 1).
BigInt core_masked_max(std::size_t ell, std::size_t kappa);

/// Uniform element of the signed message set of size M.
BigInt sample_signed_message(RandomSource& rng, const BigInt& modulus);

/// Interval from which the heuristic protocols draw lambda and mu.
struct HeuristicInterval {
  BigInt lo;
  BigInt hi;
  BigInt size() const { return hi - lo + 1; }
  bool contains(const BigInt& v) const { return v >= lo && v <= hi; }
};

/// [-floor(ceil(M/2)/(B+1)), floor(ceil(M/2)/(B+1))]. Every |lambda| in it
/// satisfies |lambda| (B + 1) <= ceil(M/2), so lambda t + mu never wraps.
HeuristicInterval heuristic_interval(const BigInt& modulus, const BigInt& bound);

/// The interval with a ceiling on the negative end,
/// [-ceil(ceil(M/2)/(B+1)), floor(ceil(M/2)/(B+1))]. It coincides with
/// heuristic_interval when (B + 1) divides ceil(M/2); otherwise its most
/// negative lambda can push lambda t + mu out of the message set.
HeuristicInterval heuristic_interval_ceil(const BigInt& modulus, const BigInt& bound);

/// #interval > 2^kappa.
bool heuristic_capacity_ok(const HeuristicInterval& interval, std::size_t kappa);
void require_heuristic_capacity(const HeuristicInterval& interval, std::size_t kappa);

/// lambda != 0, |mu| < |lambda| and sign(mu) = sign(lambda) with sign(0) = +1
/// (so mu = 0 pairs only with positive lambda).
bool heuristic_pair_ok(const BigInt& lambda, const BigInt& mu);

struct HeuristicMasks {
  BigInt lambda;
  BigInt mu;
  /// 1 iff lambda < 0.
  bool negative = false;
};

/// Draws lambda uniformly from the nonzero elements of the interval that
/// admit at least one mu, then mu uniformly among the admissible offsets.
/// When `unit_modulus` is nonzero, lambda is additionally redrawn until it is
/// invertible modulo it.
HeuristicMasks sample_heuristic_masks(RandomSource& rng, const HeuristicInterval& interval,
                                      const BigInt& unit_modulus = 0);

}  // namespace privml::masking

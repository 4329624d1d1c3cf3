#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <vector>

#include "privml/bigint.hpp"

namespace privml {

/// Source of random bytes. Implementations must be safe to share across
/// threads.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

/// Kernel CSPRNG (getrandom). Used for every key, mask, blinding scalar and
/// permutation outside of tests.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Seeded, reproducible generator. INSECURE: for tests and benchmarks only.
class InsecureSeededRandom final : public RandomSource {
 public:
  explicit InsecureSeededRandom(std::uint64_t seed) : engine_(seed) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::mutex mutex_;
  std::mt19937_64 engine_;
};

/// Process-wide SystemRandom instance.
RandomSource& system_random();

/// Uniform integer with `bits` random bits, in [0, 2^bits).
BigInt random_bits(RandomSource& rng, std::size_t bits);

/// Uniform integer in [0, bound). bound must be positive.
BigInt uniform_below(RandomSource& rng, const BigInt& bound);

/// Uniform integer in [lo, hi] (inclusive). Requires lo <= hi.
BigInt uniform_between(RandomSource& rng, const BigInt& lo, const BigInt& hi);

/// Uniform unit of Z/nZ, i.e. r in [1, n) with gcd(r, n) = 1.
BigInt random_unit(RandomSource& rng, const BigInt& n);

bool random_bit(RandomSource& rng);

/// Uniform index in [0, n).
std::size_t uniform_index(RandomSource& rng, std::size_t n);

/// Fisher-Yates shuffle driven by `rng`.
template <typename T>
void shuffle(std::vector<T>& items, RandomSource& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace privml

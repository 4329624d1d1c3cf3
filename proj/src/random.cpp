#include "privml/random.hpp"

#include <sys/random.h>

#include <cerrno>
#include <system_error>

#include "privml/errors.hpp"

namespace privml {

void SystemRandom::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    ssize_t n = ::getrandom(out.data() + done, out.size() - done, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "getrandom");
    }
    done += static_cast<std::size_t>(n);
  }
}

void InsecureSeededRandom::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mutex_);
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = engine_();
    for (int k = 0; k < 8 && i < out.size(); ++k, ++i) {
      out[i] = static_cast<std::uint8_t>(word >> (8 * k));
    }
  }
}

RandomSource& system_random() {
  static SystemRandom instance;
  return instance;
}

BigInt random_bits(RandomSource& rng, std::size_t bits) {
  if (bits == 0) return 0;
  std::vector<std::uint8_t> buf((bits + 7) / 8);
  rng.fill(buf);
  std::size_t excess = buf.size() * 8 - bits;
  buf[0] &= static_cast<std::uint8_t>(0xFFu >> excess);
  return from_bytes_be(buf);
}

BigInt uniform_below(RandomSource& rng, const BigInt& bound) {
  if (bound <= 0) throw RangeError("uniform_below: bound must be positive");
  std::size_t bits = bit_length(bound - 1);
  for (;;) {
    BigInt candidate = random_bits(rng, bits);
    if (candidate < bound) return candidate;
  }
}

BigInt uniform_between(RandomSource& rng, const BigInt& lo, const BigInt& hi) {
  if (lo > hi) throw RangeError("uniform_between: empty interval");
  return lo + uniform_below(rng, hi - lo + 1);
}

BigInt random_unit(RandomSource& rng, const BigInt& n) {
  if (n < 2) throw RangeError("random_unit: modulus must be at least 2");
  for (;;) {
    BigInt r = uniform_below(rng, n);
    if (r == 0) continue;
    BigInt g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
    if (g == 1) return r;
  }
}

bool random_bit(RandomSource& rng) {
  std::uint8_t b = 0;
  rng.fill(std::span(&b, 1));
  return (b & 1u) != 0;
}

std::size_t uniform_index(RandomSource& rng, std::size_t n) {
  if (n == 0) throw RangeError("uniform_index: empty range");
  return static_cast<std::size_t>(uniform_below(rng, BigInt(static_cast<unsigned long>(n))).get_ui());
}

}  // namespace privml

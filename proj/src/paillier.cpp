#include "privml/paillier.hpp"

#include "privml/bytes.hpp"
#include "privml/errors.hpp"

namespace privml::paillier {

namespace {

BigInt powm(const BigInt& base, const BigInt& exp, const BigInt& mod) {
  BigInt r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return r;
}

BigInt invert(const BigInt& a, const BigInt& mod) {
  BigInt r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0) {
    throw RangeError("value is not invertible modulo the given modulus");
  }
  return r;
}

BigInt gcd(const BigInt& a, const BigInt& b) {
  BigInt r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

// FNV-1a over the big-endian bytes of N.
KeyId fingerprint(const BigInt& n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : to_bytes_be(n)) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return KeyId{h};
}

BigInt random_prime(std::size_t bits, RandomSource& rng) {
  for (;;) {
    BigInt candidate = random_bits(rng, bits);
    // Top two bits set so that the product of two such primes has exactly
    // the sum of their bit lengths.
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    BigInt prime;
    mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
    if (bit_length(prime) != bits) continue;
    if (mpz_probab_prime_p(prime.get_mpz_t(), kPrimalityRounds) == 0) continue;
    return prime;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PublicKey

PublicKey::PublicKey(BigInt n) : n_(std::move(n)) {
  if (n_ <= 2 || mpz_even_p(n_.get_mpz_t())) {
    throw ConfigError("public modulus must be odd and greater than 2");
  }
  n2_ = n_ * n_;
  BigInt m1 = n_ - 1;
  bits_ = privml::bit_length(m1);  // ceil(log2 N)
  id_ = fingerprint(n_);
}

BigInt PublicKey::message_min() const {
  BigInt half = n_ / 2;  // floor(N/2)
  return -half;
}

BigInt PublicKey::message_max() const {
  BigInt ceil_half = (n_ + 1) / 2;
  return ceil_half - 1;
}

bool PublicKey::in_message_space(const BigInt& m) const {
  return m >= message_min() && m <= message_max();
}

BigInt PublicKey::to_residue(const BigInt& m) const { return mod_floor(m, n_); }

BigInt PublicKey::from_residue(const BigInt& r) const {
  BigInt ceil_half = (n_ + 1) / 2;
  if (r < ceil_half) return r;
  return r - n_;
}

Ciphertext PublicKey::encrypt(const BigInt& m, RandomSource& rng) const {
  if (!in_message_space(m)) throw RangeError("plaintext outside the message space");
  return encrypt_residue(to_residue(m), rng);
}

Ciphertext PublicKey::encrypt_residue(const BigInt& residue, RandomSource& rng) const {
  if (residue < 0 || residue >= n_) throw RangeError("residue outside [0, N)");
  BigInt r = random_unit(rng, n_);
  BigInt g_m = 1 + residue * n_;  // (1+N)^m = 1 + mN mod N^2
  BigInt c = (g_m * powm(r, n_, n2_)) % n2_;
  return Ciphertext(std::move(c), id_);
}

void PublicKey::check(const Ciphertext& c) const {
  if (c.key_id() != id_) throw KeyMismatch("ciphertext was produced under a different key");
}

Ciphertext PublicKey::add(const Ciphertext& a, const Ciphertext& b) const {
  check(a);
  check(b);
  return Ciphertext((a.value() * b.value()) % n2_, id_);
}

Ciphertext PublicKey::sub(const Ciphertext& a, const Ciphertext& b) const {
  check(a);
  check(b);
  return Ciphertext((a.value() * invert(b.value(), n2_)) % n2_, id_);
}

Ciphertext PublicKey::scale(const BigInt& k, const Ciphertext& c) const {
  check(c);
  return Ciphertext(powm(c.value(), mod_floor(k, n_), n2_), id_);
}

Ciphertext PublicKey::negate(const Ciphertext& c) const {
  check(c);
  return Ciphertext(invert(c.value(), n2_), id_);
}

Ciphertext PublicKey::add_plain(const Ciphertext& c, const BigInt& k) const {
  check(c);
  BigInt g_k = 1 + mod_floor(k, n_) * n_;
  return Ciphertext((c.value() * g_k) % n2_, id_);
}

Ciphertext PublicKey::rerandomize(const Ciphertext& c, RandomSource& rng) const {
  return add(c, encrypt_residue(0, rng));
}

// ---------------------------------------------------------------------------
// SecretKey

SecretKey::SecretKey(BigInt p, BigInt q)
    : p_(std::move(p)), q_(std::move(q)), pk_(p_ * q_) {
  if (p_ == q_) throw ConfigError("secret primes must be distinct");
  if (p_ < 3 || q_ < 3) throw ConfigError("secret primes must be odd primes");
  BigInt pm1 = p_ - 1;
  BigInt qm1 = q_ - 1;
  const BigInt& n = pk_.n();
  if (gcd(n, pm1 * qm1) != 1) throw ConfigError("gcd(N, phi(N)) != 1");
  n_inv_phi_ = invert(n, pm1 * qm1);
  p2_ = p_ * p_;
  q2_ = q_ * q_;
  n_inv_pm1_ = invert(n, pm1);
  n_inv_qm1_ = invert(n, qm1);
  n_mod_phi_p2_ = n % (p_ * pm1);
  n_mod_phi_q2_ = n % (q_ * qm1);
  q_inv_p_ = invert(q_, p_);
  p_inv_q_ = invert(p_, q_);
}

void SecretKey::validate(const Ciphertext& c) const {
  pk_.check(c);
  if (c.value() <= 0 || c.value() >= pk_.n_squared()) {
    throw DecryptionError("ciphertext outside [1, N^2)");
  }
  if (gcd(c.value(), pk_.n()) != 1) {
    throw DecryptionError("ciphertext is not coprime to N");
  }
}

BigInt SecretKey::decrypt(const Ciphertext& c) const {
  return pk_.from_residue(decrypt_residue(c));
}

BigInt SecretKey::decrypt_residue(const Ciphertext& c) const {
  validate(c);
  const BigInt& cv = c.value();

  // Recover the randomness r = c^(N^-1) mod N, one half at a time.
  BigInt r_p = powm(cv % p_, n_inv_pm1_, p_);
  BigInt r_q = powm(cv % q_, n_inv_qm1_, q_);

  // c * r^-N = 1 + mN; modulo p^2 this is 1 + (m q) p. The N-th power mod p^2
  // depends on r mod p only, so the half-size residue suffices.
  auto half = [&](const BigInt& prime, const BigInt& prime2, const BigInt& r_half,
                  const BigInt& exp, const BigInt& other_inv) {
    BigInt r_inv = invert(r_half, prime);
    BigInt u = (cv % prime2) * powm(r_inv, exp, prime2) % prime2;
    BigInt lifted = u - 1;
    if (mpz_divisible_p(lifted.get_mpz_t(), prime.get_mpz_t()) == 0) {
      throw DecryptionError("malformed ciphertext");
    }
    return mod_floor((lifted / prime) * other_inv, prime);
  };
  BigInt m_p = half(p_, p2_, r_p, n_mod_phi_p2_, q_inv_p_);
  BigInt m_q = half(q_, q2_, r_q, n_mod_phi_q2_, p_inv_q_);

  // CRT recombination.
  BigInt m = m_q + q_ * mod_floor((m_p - m_q) * q_inv_p_, p_);
  return mod_floor(m, pk_.n());
}

BigInt SecretKey::decrypt_residue_direct(const Ciphertext& c) const {
  validate(c);
  const BigInt& n = pk_.n();
  const BigInt& n2 = pk_.n_squared();
  BigInt r = powm(c.value(), n_inv_phi_, n);
  BigInt r_pow = powm(r, n, n2);
  BigInt u = c.value() * invert(r_pow, n2) % n2;
  BigInt lifted = u - 1;
  if (mpz_divisible_p(lifted.get_mpz_t(), n.get_mpz_t()) == 0) {
    throw DecryptionError("malformed ciphertext");
  }
  return lifted / n;
}

// ---------------------------------------------------------------------------

Keypair keypair_from_primes(BigInt p, BigInt q) {
  SecretKey sk(std::move(p), std::move(q));
  PublicKey pk = sk.public_key();
  return Keypair{std::move(pk), std::move(sk)};
}

Keypair generate_keypair(std::size_t bits, RandomSource& rng) {
  if (bits < kMinKeyBits) {
    throw ConfigError("key size " + std::to_string(bits) + " below the minimum of " +
                      std::to_string(kMinKeyBits) + " bits");
  }
  std::size_t p_bits = (bits + 1) / 2;
  std::size_t q_bits = bits / 2;
  for (;;) {
    BigInt p = random_prime(p_bits, rng);
    BigInt q = random_prime(q_bits, rng);
    if (p == q) continue;
    BigInt n = p * q;
    if (bit_length(n) != bits) continue;
    if (gcd(n, (p - 1) * (q - 1)) != 1) continue;
    return keypair_from_primes(std::move(p), std::move(q));
  }
}

std::vector<std::uint8_t> serialize_public_key(const PublicKey& pk) {
  ByteWriter w;
  w.prefixed(to_bytes_be(pk.n()));
  return w.take();
}

PublicKey parse_public_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  BigInt n = from_bytes_be(r.prefixed());
  r.expect_done("public key");
  return PublicKey(std::move(n));
}

std::vector<std::uint8_t> serialize_secret_key(const SecretKey& sk) {
  ByteWriter w;
  w.prefixed(to_bytes_be(sk.p()));
  w.prefixed(to_bytes_be(sk.q()));
  return w.take();
}

SecretKey parse_secret_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  BigInt p = from_bytes_be(r.prefixed());
  BigInt q = from_bytes_be(r.prefixed());
  r.expect_done("secret key");
  return SecretKey(std::move(p), std::move(q));
}

}  // namespace privml::paillier

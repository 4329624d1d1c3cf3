#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "privml/bigint.hpp"
#include "privml/random.hpp"

namespace privml::paillier {

/// Fingerprint of a public modulus. Ciphertexts carry it so that operands
/// produced under different keys are rejected.
struct KeyId {
  std::uint64_t value = 0;
  auto operator<=>(const KeyId&) const = default;
};

/// Smallest modulus size accepted by generate_keypair (test scale).
inline constexpr std::size_t kMinKeyBits = 64;
/// Production presets.
inline constexpr std::size_t kKeyBits2048 = 2048;
inline constexpr std::size_t kKeyBits3072 = 3072;
/// Miller-Rabin rounds: error probability below 2^-80.
inline constexpr int kPrimalityRounds = 40;

class Ciphertext {
 public:
  Ciphertext() = default;
  Ciphertext(BigInt value, KeyId key) : value_(std::move(value)), key_(key) {}

  const BigInt& value() const { return value_; }
  KeyId key_id() const { return key_; }

  bool operator==(const Ciphertext& other) const {
    return key_ == other.key_ && value_ == other.value_;
  }

 private:
  BigInt value_;
  KeyId key_;
};

/// Public key pk = N. Message space Z/NZ viewed as the signed set
/// {-floor(N/2), ..., ceil(N/2) - 1}.
class PublicKey {
 public:
  explicit PublicKey(BigInt n);

  const BigInt& n() const { return n_; }
  const BigInt& n_squared() const { return n2_; }
  /// ceil(log2 N) for N not a power of two.
  std::size_t bit_length() const { return bits_; }
  /// ceil(bit_length / 8): width of a plaintext scalar or key on the wire.
  std::size_t byte_length() const { return (bits_ + 7) / 8; }
  /// Width of a serialized ciphertext.
  std::size_t ciphertext_bytes() const { return 2 * byte_length(); }
  KeyId id() const { return id_; }

  /// Smallest and largest member of the signed message set.
  BigInt message_min() const;
  BigInt message_max() const;
  bool in_message_space(const BigInt& m) const;

  /// Signed message -> residue in [0, N).
  BigInt to_residue(const BigInt& m) const;
  /// Residue in [0, N) -> signed message.
  BigInt from_residue(const BigInt& r) const;

  /// Encrypts a signed message. Throws RangeError outside the message set.
  Ciphertext encrypt(const BigInt& m, RandomSource& rng) const;
  /// Encrypts a residue in [0, N).
  Ciphertext encrypt_residue(const BigInt& residue, RandomSource& rng) const;

  Ciphertext add(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext sub(const Ciphertext& a, const Ciphertext& b) const;
  /// Encryption of k * m for any integer k (reduced modulo N).
  Ciphertext scale(const BigInt& k, const Ciphertext& c) const;
  Ciphertext negate(const Ciphertext& c) const;
  /// Adds a public plaintext constant without fresh randomness.
  Ciphertext add_plain(const Ciphertext& c, const BigInt& k) const;
  /// Same plaintext, fresh randomness: c + Enc(0).
  Ciphertext rerandomize(const Ciphertext& c, RandomSource& rng) const;

  /// Throws KeyMismatch if c was not produced under this key.
  void check(const Ciphertext& c) const;

  bool operator==(const PublicKey& other) const { return n_ == other.n_; }

 private:
  BigInt n_;
  BigInt n2_;
  std::size_t bits_ = 0;
  KeyId id_;
};

/// Secret key sk = {p, q} with precomputed CRT decryption material.
class SecretKey {
 public:
  SecretKey(BigInt p, BigInt q);

  const PublicKey& public_key() const { return pk_; }
  const BigInt& p() const { return p_; }
  const BigInt& q() const { return q_; }
  /// N^-1 mod (p-1)(q-1).
  const BigInt& decryption_exponent() const { return n_inv_phi_; }

  /// Signed plaintext in the message set.
  BigInt decrypt(const Ciphertext& c) const;
  /// Plaintext residue in [0, N).
  BigInt decrypt_residue(const Ciphertext& c) const;
  /// Same result as decrypt_residue, computed with full-size arithmetic
  /// (r = c^(N^-1 mod phi) mod N, then m = ((c r^-N mod N^2) - 1) / N).
  BigInt decrypt_residue_direct(const Ciphertext& c) const;

 private:
  void validate(const Ciphertext& c) const;

  BigInt p_, q_;
  PublicKey pk_;
  BigInt n_inv_phi_;
  BigInt p2_, q2_;
  BigInt n_inv_pm1_, n_inv_qm1_;   // N^-1 mod p-1, mod q-1
  BigInt n_mod_phi_p2_, n_mod_phi_q2_;  // N mod p(p-1), mod q(q-1)
  BigInt q_inv_p_, p_inv_q_;
};

struct Keypair {
  PublicKey pub;
  SecretKey sec;
};

/// Generates N = p q with exactly `bits` bits, p and q of balanced size.
/// Throws ConfigError when bits < kMinKeyBits.
Keypair generate_keypair(std::size_t bits, RandomSource& rng);

Keypair keypair_from_primes(BigInt p, BigInt q);

/// u32 length-prefixed big-endian encodings.
std::vector<std::uint8_t> serialize_public_key(const PublicKey& pk);
PublicKey parse_public_key(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_secret_key(const SecretKey& sk);
SecretKey parse_secret_key(std::span<const std::uint8_t> bytes);

}  // namespace privml::paillier

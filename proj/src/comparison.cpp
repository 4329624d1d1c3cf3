#include "privml/comparison.hpp"

#include "privml/errors.hpp"

namespace privml::comparison {

using paillier::Ciphertext;

ComparisonRequest bit_owner_request(const paillier::PublicKey& owner_key, const BigInt& mu,
                                    std::size_t bit_length, RandomSource& rng) {
  if (bit_length == 0) throw RangeError("comparison bit length must be positive");
  if (mu < 0 || mu >= pow2(bit_length)) {
    throw RangeError("comparison input does not fit in " + std::to_string(bit_length) + " bits");
  }
  ComparisonRequest req;
  req.encrypted_bits.reserve(bit_length);
  for (std::size_t i = 0; i < bit_length; ++i) {
    req.encrypted_bits.push_back(owner_key.encrypt(test_bit(mu, i) ? 1 : 0, rng));
  }
  return req;
}

ComparisonResponse evaluator_respond(const paillier::PublicKey& owner_key,
                                     const ComparisonRequest& request, const BigInt& eta,
                                     bool evaluator_share, RandomSource& rng) {
  const std::size_t l = request.bit_length();
  if (l == 0) throw RangeError("empty comparison request");
  if (eta < 0 || eta >= pow2(l)) {
    throw RangeError("evaluator input does not fit in " + std::to_string(l) + " bits");
  }
  for (const auto& c : request.encrypted_bits) owner_key.check(c);

  // Enc(mu_j XOR eta_j): Enc(mu_j) when eta_j = 0, Enc(1) - Enc(mu_j) otherwise.
  std::vector<Ciphertext> xor_bits;
  xor_bits.reserve(l);
  for (std::size_t j = 0; j < l; ++j) {
    const Ciphertext& mu_j = request.encrypted_bits[j];
    xor_bits.push_back(test_bit(eta, j) ? owner_key.add_plain(owner_key.negate(mu_j), 1) : mu_j);
  }

  const bool negate = evaluator_share;  // s = -1
  ComparisonResponse resp;
  resp.blinded_values.reserve(l + 1);

  // Running encryption of sum_{j>i} (mu_j XOR eta_j); starts as Enc(0).
  Ciphertext suffix(BigInt(1), owner_key.id());
  for (std::size_t k = l; k-- > 0;) {
    const Ciphertext& mu_i = request.encrypted_bits[k];
    int eta_i = test_bit(eta, k) ? 1 : 0;
    // 1 + s*mu_i - s*eta_i
    Ciphertext h = negate ? owner_key.negate(mu_i) : mu_i;
    h = owner_key.add_plain(h, negate ? 1 + eta_i : 1 - eta_i);
    h = owner_key.add(h, suffix);
    h = owner_key.scale(random_unit(rng, owner_key.n()), h);
    resp.blinded_values.push_back(owner_key.rerandomize(h, rng));
    suffix = owner_key.add(suffix, xor_bits[k]);
  }
  // h_-1 = delta + sum_j (mu_j XOR eta_j)
  Ciphertext h_last = owner_key.add_plain(suffix, evaluator_share ? 1 : 0);
  h_last = owner_key.scale(random_unit(rng, owner_key.n()), h_last);
  resp.blinded_values.push_back(owner_key.rerandomize(h_last, rng));

  shuffle(resp.blinded_values, rng);
  return resp;
}

bool bit_owner_finish(const paillier::SecretKey& owner_key, const ComparisonResponse& response,
                      std::size_t bit_length) {
  if (response.blinded_values.size() != bit_length + 1) {
    throw ProtocolViolation("comparison response has " +
                            std::to_string(response.blinded_values.size()) +
                            " values, expected " + std::to_string(bit_length + 1));
  }
  std::size_t zeros = 0;
  for (const auto& c : response.blinded_values) {
    if (owner_key.decrypt_residue(c) == 0) ++zeros;
  }
  if (zeros > 1) throw ProtocolViolation("more than one blinded value decrypts to zero");
  return zeros == 1;
}

}  // namespace privml::comparison

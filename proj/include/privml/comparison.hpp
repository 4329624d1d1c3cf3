#pragma once

#include <cstddef>
#include <vector>

#include "privml/bigint.hpp"
#include "privml/paillier.hpp"
#include "privml/random.hpp"

/// Two-party private comparison with XOR-shared output.
///
/// The bit owner holds an l-bit value mu and a key pair; the evaluator holds
/// an l-bit value eta and its own share bit delta_E. After one exchange the
/// bit owner obtains delta_O such that delta_O XOR delta_E = [mu <= eta].
/// Neither share alone says anything about the comparison.
///
/// The same three calls serve both orientations: in the linear-model
/// protocols the client owns the bits, in the network protocols the server
/// does.
namespace privml::comparison {

/// Encryptions of the bits of mu, least significant first.
struct ComparisonRequest {
  std::vector<paillier::Ciphertext> encrypted_bits;
  std::size_t bit_length() const { return encrypted_bits.size(); }
};

/// The l+1 blinded values h*_i in a uniformly random order.
struct ComparisonResponse {
  std::vector<paillier::Ciphertext> blinded_values;
};

/// Step 1: encrypt each bit of mu under the owner's key.
/// Throws RangeError unless 0 <= mu < 2^bit_length.
ComparisonRequest bit_owner_request(const paillier::PublicKey& owner_key, const BigInt& mu,
                                    std::size_t bit_length, RandomSource& rng);

/// Steps 2-3: the evaluator blinds, for i = l-1 .. 0,
///   h_i = 1 + s (mu_i - eta_i) + sum_{j>i} (mu_j XOR eta_j),   s = 1 - 2 delta,
/// plus h_-1 = delta + sum_j (mu_j XOR eta_j), multiplies each by a fresh
/// unit r_i, re-randomizes and shuffles.
/// Throws RangeError if eta does not fit in the request's bit length.
ComparisonResponse evaluator_respond(const paillier::PublicKey& owner_key,
                                     const ComparisonRequest& request, const BigInt& eta,
                                     bool evaluator_share, RandomSource& rng);

/// Step 4: the owner's share is 1 iff some blinded value decrypts to zero.
/// Throws ProtocolViolation if more than one does, or if the response has the
/// wrong length.
bool bit_owner_finish(const paillier::SecretKey& owner_key, const ComparisonResponse& response,
                      std::size_t bit_length);

}  // namespace privml::comparison

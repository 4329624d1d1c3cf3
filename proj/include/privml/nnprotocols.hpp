#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "privml/activation.hpp"
#include "privml/linear.hpp"
#include "privml/masking.hpp"
#include "privml/network.hpp"
#include "privml/paillier.hpp"
#include "privml/prediction.hpp"
#include "privml/random.hpp"

/// Private evaluation of feed-forward networks.
///
/// Data ciphertexts are always under the client key. In encrypted mode the
/// server keeps every hidden value encrypted and evaluates sign and relu
/// units interactively; in the core variant the comparison runs with the
/// roles swapped (the server owns the mask bits, under its own key).
namespace privml::nn {

using paillier::Ciphertext;
using network::Mode;
using network::NetworkSpec;
using network::Variant;

/// Server -> client payload for one unit.
struct UnitChallenge {
  /// Enc_C(t + mu) (core) or Enc_C(lambda t + mu) (heuristic).
  Ciphertext masked;
  /// Enc_S(mu_0..mu_{ell-1}); core variant only.
  std::vector<Ciphertext> mask_bits;
};

/// Client -> server payload for one unit.
struct UnitReply {
  /// Under the client key. sign: {y*}; relu: {b, z[0], z[1]}.
  std::vector<Ciphertext> values;
  /// Blinded comparison values under the server key; core variant only.
  std::vector<Ciphertext> comparison;
};

/// What the server remembers about one unit between challenge and reply.
struct UnitState {
  BigInt mask;
  BigInt lambda = 1;
  bool negative = false;
};

// ---------------------------------------------------------------------------
// Core variant (statistical masking plus comparison).

/// Masks t with mu uniform in [2^ell - 1, 2^(ell+kappa)) and encrypts the ell
/// low bits of mu under the server key. Throws ConfigError when the client
/// modulus is too small.
std::pair<UnitChallenge, UnitState> core_challenge(const paillier::PublicKey& client_key,
                                                   const paillier::PublicKey& server_key,
                                                   const Ciphertext& t, std::size_t ell,
                                                   std::size_t kappa, RandomSource& rng);
std::pair<UnitChallenge, UnitState> core_challenge_with_mask(const paillier::PublicKey& client_key,
                                                             const paillier::PublicKey& server_key,
                                                             const Ciphertext& t, std::size_t ell,
                                                             const BigInt& mask,
                                                             RandomSource& rng);

/// Client side: draws b (unless forced), sets its share to bit ell of t* XOR
/// b, returns Enc_C((-1)^b) and the comparison answer.
UnitReply sign_core_reply(const paillier::SecretKey& client_key,
                          const paillier::PublicKey& server_key, const UnitChallenge& challenge,
                          std::size_t ell, RandomSource& rng,
                          std::optional<bool> forced_b = std::nullopt);
/// Server side: Enc_C(sign(t)) = (-1)^(1 - (delta_S XOR mu_ell)) * Enc_C(y*).
Ciphertext sign_core_finish(const paillier::SecretKey& server_key,
                            const paillier::PublicKey& client_key, const UnitState& state,
                            const UnitReply& reply, std::size_t ell, RandomSource& rng);

/// Client side: Enc_C(b), the pair (Enc(0), t**) or (t**, Enc(0)) with t**
/// a re-randomization of t*, and the comparison answer.
UnitReply relu_core_reply(const paillier::SecretKey& client_key,
                          const paillier::PublicKey& server_key, const UnitChallenge& challenge,
                          std::size_t ell, RandomSource& rng,
                          std::optional<bool> forced_b = std::nullopt);
/// Server side: z[d'] - mu * Enc_C(b XOR d') with d' = delta_S XOR mu_ell.
Ciphertext relu_core_finish(const paillier::SecretKey& server_key,
                            const paillier::PublicKey& client_key, const UnitState& state,
                            const UnitReply& reply, std::size_t ell, RandomSource& rng);

// ---------------------------------------------------------------------------
// Heuristic variant (multiplicative masking, no comparison).

/// Enc_C(lambda t + mu) with (lambda, mu) drawn from the heuristic interval
/// for bound 2^ell - 1. With `invertible`, lambda is a unit modulo N.
std::pair<UnitChallenge, UnitState> heur_challenge(const paillier::PublicKey& client_key,
                                                   const Ciphertext& t, std::size_t ell,
                                                   std::size_t kappa, bool invertible,
                                                   RandomSource& rng);
std::pair<UnitChallenge, UnitState> heur_challenge_with_masks(const paillier::PublicKey& client_key,
                                                              const Ciphertext& t,
                                                              const masking::HeuristicMasks& masks,
                                                              RandomSource& rng);

/// Client side: Enc_C(sign(t*)).
UnitReply sign_heur_reply(const paillier::SecretKey& client_key, const UnitChallenge& challenge,
                          RandomSource& rng);
Ciphertext sign_heur_finish(const paillier::PublicKey& client_key, const UnitState& state,
                            const UnitReply& reply, RandomSource& rng);

/// Client side: b = [t* < 0], Enc_C(b) and the ordered pair.
UnitReply relu_heur_reply(const paillier::SecretKey& client_key, const UnitChallenge& challenge,
                          RandomSource& rng);
/// Server side: lambda^-1 (z[d'] - mu * Enc_C(b XOR d')) with d' = 1 - delta_S.
Ciphertext relu_heur_finish(const paillier::PublicKey& client_key, const UnitState& state,
                            const UnitReply& reply, RandomSource& rng);

// ---------------------------------------------------------------------------
// Layer messages.

/// Generic mode, server -> client: the inner products of one hidden layer.
struct GenericLayer {
  std::size_t layer = 0;
  Activation activation = Activation::identity;
  std::size_t pre_scale = 0;
  std::vector<Ciphertext> inner;
};

/// Generic mode, client -> server: re-encrypted activations.
struct GenericReply {
  std::size_t layer = 0;
  std::vector<Ciphertext> activations;
};

/// Encrypted mode, server -> client: one challenge per unit of a layer.
struct LayerChallenge {
  std::size_t layer = 0;
  Activation activation = Activation::sign;
  Variant variant = Variant::core;
  std::size_t ell = 0;
  /// Present in the core variant.
  std::optional<paillier::PublicKey> server_key;
  std::vector<UnitChallenge> units;
};

struct LayerReply {
  std::size_t layer = 0;
  std::vector<UnitReply> units;
};

/// Server -> client, last message of every evaluation.
struct NetworkOutput {
  Activation activation = Activation::identity;
  /// True when the activation was already evaluated under encryption.
  bool applied = false;
  std::size_t scale = 0;
  std::vector<Ciphertext> values;
};

using ServerMessage = std::variant<GenericLayer, LayerChallenge, NetworkOutput>;
using ClientMessage = std::variant<GenericReply, LayerReply>;

/// Server half of one network evaluation. Never decrypts under the client
/// key; the server key is used only for comparison shares.
class ServerSession {
 public:
  /// `server_key` is required for encrypted mode with the core variant.
  /// Throws ConfigError for activations or key sizes the mode cannot serve.
  ServerSession(const NetworkSpec& spec, Mode mode, Variant variant,
                const paillier::SecretKey* server_key, std::size_t kappa, RandomSource& rng);

  ServerMessage start(const paillier::PublicKey& client_key, std::vector<Ciphertext> inputs);
  ServerMessage on_reply(const ClientMessage& reply);
  bool finished() const { return finished_; }

 private:
  ServerMessage advance();
  std::vector<Ciphertext> inner_products(std::size_t l) const;

  const NetworkSpec& spec_;
  Mode mode_;
  Variant variant_;
  const paillier::SecretKey* server_key_;
  std::size_t kappa_;
  RandomSource& rng_;
  std::optional<paillier::PublicKey> client_key_;
  std::vector<Ciphertext> state_;
  std::vector<UnitState> pending_;
  std::size_t layer_ = 0;
  bool finished_ = false;
};

/// Client half of one network evaluation.
class ClientSession {
 public:
  ClientSession(const paillier::SecretKey& client_key, std::size_t precision, RandomSource& rng);

  /// Enc_C(x_1..x_d).
  std::vector<Ciphertext> start(const linear::FeatureVector& x);
  /// Returns the reply, or nothing once the output arrived.
  std::optional<ClientMessage> on_message(const ServerMessage& msg);
  const std::vector<Prediction>& outputs() const { return outputs_; }
  bool finished() const { return finished_; }

 private:
  GenericReply on_generic(const GenericLayer& msg);
  LayerReply on_challenge(const LayerChallenge& msg);
  void on_output(const NetworkOutput& msg);

  const paillier::SecretKey& key_;
  std::size_t precision_;
  RandomSource& rng_;
  std::vector<Prediction> outputs_;
  bool finished_ = false;
};

/// In-process evaluation without serialization.
struct NetworkRun {
  std::vector<Prediction> outputs;
  std::size_t messages_up = 0;
  std::size_t messages_down = 0;
  /// Server -> client messages addressed to each layer.
  std::vector<std::size_t> rounds_per_layer;
};

NetworkRun evaluate_network(const NetworkSpec& spec, Mode mode, Variant variant,
                            const paillier::SecretKey& client_key,
                            const paillier::SecretKey* server_key, const linear::FeatureVector& x,
                            std::size_t kappa, RandomSource& rng);

}  // namespace privml::nn

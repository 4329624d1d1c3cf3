#include "privml/nnprotocols.hpp"

#include "privml/comparison.hpp"
#include "privml/errors.hpp"
#include "privml/fixedpoint.hpp"

namespace privml::nn {

namespace {

void require_values(const UnitReply& reply, std::size_t n, const char* what) {
  if (reply.values.size() != n) {
    throw ProtocolViolation(std::string(what) + " reply carries " +
                            std::to_string(reply.values.size()) + " values, expected " +
                            std::to_string(n));
  }
}

// Enc(b XOR d) from Enc(b): Enc(b) when d = 0, Enc(1) - Enc(b) otherwise.
Ciphertext xor_with(const paillier::PublicKey& key, const Ciphertext& b, bool d) {
  return d ? key.add_plain(key.negate(b), 1) : b;
}

// Enc(b) and the ordered pair (Enc(0), t**) for b = 0, (t**, Enc(0)) for b = 1.
void relu_pair(const paillier::PublicKey& key, const Ciphertext& masked, bool b, RandomSource& rng,
               UnitReply& reply) {
  Ciphertext zero = key.encrypt(0, rng);
  Ciphertext t2 = key.rerandomize(masked, rng);
  reply.values.push_back(key.encrypt(b ? 1 : 0, rng));
  if (b) {
    reply.values.push_back(t2);
    reply.values.push_back(zero);
  } else {
    reply.values.push_back(zero);
    reply.values.push_back(t2);
  }
}

// z[d] - mu * Enc(b XOR d).
Ciphertext relu_select(const paillier::PublicKey& key, const UnitReply& reply, bool d,
                       const BigInt& mu) {
  for (const auto& c : reply.values) key.check(c);
  const Ciphertext& chosen = reply.values[d ? 2 : 1];
  return key.sub(chosen, key.scale(mu, xor_with(key, reply.values[0], d)));
}

// Client side of the swapped comparison: eta = t* mod 2^ell, share = bit ell
// of t* XOR b.
std::vector<Ciphertext> answer_comparison(const paillier::SecretKey& client_key,
                                          const paillier::PublicKey& server_key,
                                          const UnitChallenge& challenge, std::size_t ell,
                                          bool b, RandomSource& rng) {
  if (challenge.mask_bits.size() != ell) {
    throw ProtocolViolation("challenge carries " + std::to_string(challenge.mask_bits.size()) +
                            " mask bits, expected " + std::to_string(ell));
  }
  BigInt t_star = client_key.decrypt_residue(challenge.masked);
  BigInt eta = t_star % pow2(ell);
  bool share = test_bit(t_star, ell) != b;
  comparison::ComparisonRequest req{challenge.mask_bits};
  return comparison::evaluator_respond(server_key, req, eta, share, rng).blinded_values;
}

// delta_S XOR mu_ell, which equals [t >= 0] XOR b.
bool core_selector(const paillier::SecretKey& server_key, const UnitState& state,
                   const UnitReply& reply, std::size_t ell) {
  comparison::ComparisonResponse resp{reply.comparison};
  bool delta_s = comparison::bit_owner_finish(server_key, resp, ell);
  return delta_s != test_bit(state.mask, ell);
}

}  // namespace

std::pair<UnitChallenge, UnitState> core_challenge(const paillier::PublicKey& client_key,
                                                   const paillier::PublicKey& server_key,
                                                   const Ciphertext& t, std::size_t ell,
                                                   std::size_t kappa, RandomSource& rng) {
  masking::require_core_capacity(client_key.n(), ell, kappa);
  BigInt mask = masking::sample_core_mask(rng, ell, kappa);
  return core_challenge_with_mask(client_key, server_key, t, ell, mask, rng);
}

std::pair<UnitChallenge, UnitState> core_challenge_with_mask(const paillier::PublicKey& client_key,
                                                             const paillier::PublicKey& server_key,
                                                             const Ciphertext& t, std::size_t ell,
                                                             const BigInt& mask,
                                                             RandomSource& rng) {
  if (mask < pow2(ell) - 1) throw RangeError("mask below 2^ell - 1");
  UnitChallenge ch;
  ch.masked = client_key.add(t, client_key.encrypt_residue(client_key.to_residue(mask), rng));
  ch.mask_bits = comparison::bit_owner_request(server_key, mask % pow2(ell), ell, rng).encrypted_bits;
  UnitState st;
  st.mask = mask;
  return {std::move(ch), std::move(st)};
}

UnitReply sign_core_reply(const paillier::SecretKey& client_key,
                          const paillier::PublicKey& server_key, const UnitChallenge& challenge,
                          std::size_t ell, RandomSource& rng, std::optional<bool> forced_b) {
  bool b = forced_b ? *forced_b : random_bit(rng);
  UnitReply reply;
  reply.comparison = answer_comparison(client_key, server_key, challenge, ell, b, rng);
  reply.values.push_back(client_key.public_key().encrypt(b ? -1 : 1, rng));
  return reply;
}

Ciphertext sign_core_finish(const paillier::SecretKey& server_key,
                            const paillier::PublicKey& client_key, const UnitState& state,
                            const UnitReply& reply, std::size_t ell, RandomSource& rng) {
  require_values(reply, 1, "sign");
  client_key.check(reply.values[0]);
  bool keep = core_selector(server_key, state, reply, ell);
  Ciphertext y = keep ? reply.values[0] : client_key.negate(reply.values[0]);
  return client_key.rerandomize(y, rng);
}

UnitReply relu_core_reply(const paillier::SecretKey& client_key,
                          const paillier::PublicKey& server_key, const UnitChallenge& challenge,
                          std::size_t ell, RandomSource& rng, std::optional<bool> forced_b) {
  bool b = forced_b ? *forced_b : random_bit(rng);
  UnitReply reply;
  reply.comparison = answer_comparison(client_key, server_key, challenge, ell, b, rng);
  relu_pair(client_key.public_key(), challenge.masked, b, rng, reply);
  return reply;
}

Ciphertext relu_core_finish(const paillier::SecretKey& server_key,
                            const paillier::PublicKey& client_key, const UnitState& state,
                            const UnitReply& reply, std::size_t ell, RandomSource& rng) {
  require_values(reply, 3, "relu");
  bool d = core_selector(server_key, state, reply, ell);
  return client_key.rerandomize(relu_select(client_key, reply, d, state.mask), rng);
}

std::pair<UnitChallenge, UnitState> heur_challenge(const paillier::PublicKey& client_key,
                                                   const Ciphertext& t, std::size_t ell,
                                                   std::size_t kappa, bool invertible,
                                                   RandomSource& rng) {
  auto interval = masking::heuristic_interval(client_key.n(), masking::bound_for_bits(ell));
  masking::require_heuristic_capacity(interval, kappa);
  auto masks = masking::sample_heuristic_masks(rng, interval, invertible ? client_key.n() : BigInt(0));
  return heur_challenge_with_masks(client_key, t, masks, rng);
}

std::pair<UnitChallenge, UnitState> heur_challenge_with_masks(const paillier::PublicKey& client_key,
                                                              const Ciphertext& t,
                                                              const masking::HeuristicMasks& masks,
                                                              RandomSource& rng) {
  if (!masking::heuristic_pair_ok(masks.lambda, masks.mu)) {
    throw RangeError("heuristic masks violate the sign and magnitude constraints");
  }
  UnitChallenge ch;
  ch.masked = client_key.rerandomize(client_key.add_plain(client_key.scale(masks.lambda, t), masks.mu), rng);
  UnitState st;
  st.mask = masks.mu;
  st.lambda = masks.lambda;
  st.negative = masks.lambda < 0;
  return {std::move(ch), std::move(st)};
}

UnitReply sign_heur_reply(const paillier::SecretKey& client_key, const UnitChallenge& challenge,
                          RandomSource& rng) {
  UnitReply reply;
  int s = sign_nonneg(client_key.decrypt(challenge.masked));
  reply.values.push_back(client_key.public_key().encrypt(s, rng));
  return reply;
}

Ciphertext sign_heur_finish(const paillier::PublicKey& client_key, const UnitState& state,
                            const UnitReply& reply, RandomSource& rng) {
  require_values(reply, 1, "sign");
  client_key.check(reply.values[0]);
  Ciphertext y = state.negative ? client_key.negate(reply.values[0]) : reply.values[0];
  return client_key.rerandomize(y, rng);
}

UnitReply relu_heur_reply(const paillier::SecretKey& client_key, const UnitChallenge& challenge,
                          RandomSource& rng) {
  bool b = client_key.decrypt(challenge.masked) < 0;
  UnitReply reply;
  relu_pair(client_key.public_key(), challenge.masked, b, rng, reply);
  return reply;
}

Ciphertext relu_heur_finish(const paillier::PublicKey& client_key, const UnitState& state,
                            const UnitReply& reply, RandomSource& rng) {
  require_values(reply, 3, "relu");
  BigInt inv;
  BigInt lambda = mod_floor(state.lambda, client_key.n());
  if (mpz_invert(inv.get_mpz_t(), lambda.get_mpz_t(), client_key.n().get_mpz_t()) == 0) {
    throw ConfigError("heuristic scalar is not invertible");
  }
  Ciphertext y = relu_select(client_key, reply, !state.negative, state.mask);
  return client_key.rerandomize(client_key.scale(inv, y), rng);
}

// ---------------------------------------------------------------------------

ServerSession::ServerSession(const NetworkSpec& spec, Mode mode, Variant variant,
                             const paillier::SecretKey* server_key, std::size_t kappa,
                             RandomSource& rng)
    : spec_(spec), mode_(mode), variant_(variant), server_key_(server_key), kappa_(kappa), rng_(rng) {
  if (mode_ == Mode::encrypted) {
    spec_.require_encrypted_activations();
    if (variant_ == Variant::core && server_key_ == nullptr) {
      throw ConfigError("core variant needs a server key pair");
    }
  }
}

std::vector<Ciphertext> ServerSession::inner_products(std::size_t l) const {
  std::vector<Ciphertext> out;
  const auto& layer = spec_.layer(l);
  out.reserve(layer.units());
  for (const auto& row : layer.weights) {
    out.push_back(linear::encrypted_inner_product(*client_key_, row, state_, rng_));
  }
  return out;
}

ServerMessage ServerSession::start(const paillier::PublicKey& client_key,
                                   std::vector<Ciphertext> inputs) {
  if (client_key_) throw Error("network session already started");
  if (inputs.size() != spec_.input_dim()) {
    throw DimensionMismatch("network expects " + std::to_string(spec_.input_dim()) +
                            " inputs, got " + std::to_string(inputs.size()));
  }
  for (const auto& c : inputs) client_key.check(c);
  if (mode_ == Mode::encrypted) spec_.require_encrypted_capacity(client_key.n(), kappa_, variant_);
  client_key_ = client_key;
  state_ = std::move(inputs);
  layer_ = 0;
  return advance();
}

ServerMessage ServerSession::advance() {
  const std::size_t l = layer_;
  const auto& layer = spec_.layer(l);
  const auto& info = spec_.info(l);
  const bool last = l + 1 == spec_.depth();
  auto t = inner_products(l);

  if (mode_ == Mode::generic || !spec_.protocol_layer(l)) {
    if (last) {
      finished_ = true;
      return NetworkOutput{layer.activation, false, info.pre_scale, std::move(t)};
    }
    return GenericLayer{l, layer.activation, info.pre_scale, std::move(t)};
  }

  LayerChallenge ch;
  ch.layer = l;
  ch.activation = layer.activation;
  ch.variant = variant_;
  ch.ell = info.ell;
  pending_.clear();
  const bool relu = layer.activation == Activation::relu;
  for (const auto& tj : t) {
    auto [unit, st] = variant_ == Variant::core
                          ? core_challenge(*client_key_, server_key_->public_key(), tj, info.ell,
                                           kappa_, rng_)
                          : heur_challenge(*client_key_, tj, info.ell, kappa_, relu, rng_);
    ch.units.push_back(std::move(unit));
    pending_.push_back(std::move(st));
  }
  if (variant_ == Variant::core) ch.server_key = server_key_->public_key();
  return ch;
}

ServerMessage ServerSession::on_reply(const ClientMessage& reply) {
  if (!client_key_ || finished_) throw ProtocolViolation("unexpected network reply");
  const auto& layer = spec_.layer(layer_);
  const auto& info = spec_.info(layer_);
  const bool protocol = mode_ == Mode::encrypted && spec_.protocol_layer(layer_);

  if (const auto* g = std::get_if<GenericReply>(&reply)) {
    if (protocol || g->layer != layer_) throw ProtocolViolation("out-of-order generic reply");
    if (g->activations.size() != layer.units()) {
      throw ProtocolViolation("generic reply has " + std::to_string(g->activations.size()) +
                              " values, expected " + std::to_string(layer.units()));
    }
    for (const auto& c : g->activations) client_key_->check(c);
    state_ = g->activations;
  } else {
    const auto& r = std::get<LayerReply>(reply);
    if (!protocol || r.layer != layer_) throw ProtocolViolation("out-of-order layer reply");
    if (r.units.size() != pending_.size()) {
      throw ProtocolViolation("layer reply has " + std::to_string(r.units.size()) +
                              " units, expected " + std::to_string(pending_.size()));
    }
    std::vector<Ciphertext> next;
    next.reserve(pending_.size());
    const bool relu = layer.activation == Activation::relu;
    for (std::size_t j = 0; j < pending_.size(); ++j) {
      const auto& st = pending_[j];
      const auto& u = r.units[j];
      if (variant_ == Variant::core) {
        next.push_back(relu ? relu_core_finish(*server_key_, *client_key_, st, u, info.ell, rng_)
                            : sign_core_finish(*server_key_, *client_key_, st, u, info.ell, rng_));
      } else {
        next.push_back(relu ? relu_heur_finish(*client_key_, st, u, rng_)
                            : sign_heur_finish(*client_key_, st, u, rng_));
      }
    }
    pending_.clear();
    if (layer_ + 1 == spec_.depth()) {
      finished_ = true;
      return NetworkOutput{layer.activation, true, info.output_scale, std::move(next)};
    }
    state_ = std::move(next);
  }
  ++layer_;
  return advance();
}

ClientSession::ClientSession(const paillier::SecretKey& client_key, std::size_t precision,
                             RandomSource& rng)
    : key_(client_key), precision_(precision), rng_(rng) {}

std::vector<Ciphertext> ClientSession::start(const linear::FeatureVector& x) {
  return linear::regr_core_request(key_.public_key(), x, rng_).features;
}

std::optional<ClientMessage> ClientSession::on_message(const ServerMessage& msg) {
  if (finished_) throw ProtocolViolation("message after network output");
  if (const auto* g = std::get_if<GenericLayer>(&msg)) return ClientMessage{on_generic(*g)};
  if (const auto* c = std::get_if<LayerChallenge>(&msg)) return ClientMessage{on_challenge(*c)};
  on_output(std::get<NetworkOutput>(msg));
  return std::nullopt;
}

GenericReply ClientSession::on_generic(const GenericLayer& msg) {
  GenericReply reply;
  reply.layer = msg.layer;
  const auto& pk = key_.public_key();
  for (const auto& c : msg.inner) {
    BigInt t = key_.decrypt(c);
    reply.activations.push_back(
        pk.encrypt(network::activate_fixed(msg.activation, t, msg.pre_scale, precision_), rng_));
  }
  return reply;
}

LayerReply ClientSession::on_challenge(const LayerChallenge& msg) {
  if (msg.activation != Activation::sign && msg.activation != Activation::relu) {
    throw ProtocolViolation("challenge for unsupported activation");
  }
  const bool relu = msg.activation == Activation::relu;
  LayerReply reply;
  reply.layer = msg.layer;
  for (const auto& u : msg.units) {
    if (msg.variant == Variant::core) {
      if (!msg.server_key) throw ProtocolViolation("core challenge without a server key");
      reply.units.push_back(relu ? relu_core_reply(key_, *msg.server_key, u, msg.ell, rng_)
                                 : sign_core_reply(key_, *msg.server_key, u, msg.ell, rng_));
    } else {
      reply.units.push_back(relu ? relu_heur_reply(key_, u, rng_) : sign_heur_reply(key_, u, rng_));
    }
  }
  return reply;
}

void ClientSession::on_output(const NetworkOutput& msg) {
  outputs_.clear();
  for (const auto& c : msg.values) {
    BigInt t = key_.decrypt(c);
    Prediction p;
    if (msg.applied) {
      p.raw = t;
      p.value = fixedpoint::decode(t, msg.scale);
      if (msg.activation == Activation::sign) p.class_label = sign_nonneg(t);
    } else {
      p.raw = network::activate_fixed(msg.activation, t, msg.scale, precision_);
      p.value = apply_activation(msg.activation, fixedpoint::decode(t, msg.scale));
      if (msg.activation == Activation::sign) p.class_label = sign_nonneg(t);
    }
    outputs_.push_back(std::move(p));
  }
  finished_ = true;
}

NetworkRun evaluate_network(const NetworkSpec& spec, Mode mode, Variant variant,
                            const paillier::SecretKey& client_key,
                            const paillier::SecretKey* server_key, const linear::FeatureVector& x,
                            std::size_t kappa, RandomSource& rng) {
  NetworkRun run;
  run.rounds_per_layer.assign(spec.depth(), 0);
  ServerSession server(spec, mode, variant, server_key, kappa, rng);
  ClientSession client(client_key, spec.precision(), rng);

  auto inputs = client.start(x);
  ++run.messages_up;
  ServerMessage msg = server.start(client_key.public_key(), std::move(inputs));
  for (;;) {
    ++run.messages_down;
    if (const auto* g = std::get_if<GenericLayer>(&msg)) ++run.rounds_per_layer[g->layer];
    if (const auto* c = std::get_if<LayerChallenge>(&msg)) ++run.rounds_per_layer[c->layer];
    auto reply = client.on_message(msg);
    if (!reply) break;
    ++run.messages_up;
    msg = server.on_reply(*reply);
  }
  run.outputs = client.outputs();
  return run;
}

}  // namespace privml::nn

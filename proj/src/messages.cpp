#include "privml/messages.hpp"

#include "privml/errors.hpp"

namespace privml::messages {

using paillier::Ciphertext;
using paillier::PublicKey;
using wire::Part;
using wire::PartReader;

namespace {

// Counts announced by the peer are bounded by the parts actually present.
std::size_t checked_count(PartReader& r, std::size_t per_item = 1) {
  std::uint32_t n = r.u32();
  if (per_item != 0 && n > r.remaining() / per_item + 1) {
    throw DecodeError("announced count " + std::to_string(n) + " exceeds message size");
  }
  return n;
}

void push_all(std::vector<Part>& parts, const std::vector<Ciphertext>& cs, const PublicKey& key) {
  for (const auto& c : cs) parts.push_back(wire::ciphertext_part(c, key));
}

std::uint32_t activation_code(Activation a) { return static_cast<std::uint32_t>(a); }

Activation activation_from(std::uint32_t code) {
  if (code > static_cast<std::uint32_t>(Activation::relu)) {
    throw DecodeError("unknown activation code " + std::to_string(code));
  }
  return static_cast<Activation>(code);
}

}  // namespace

Frame encode_error(const SessionId& session, ErrorKind kind, const std::string& message) {
  return Frame{ProtocolId::error, step::error, session,
               {wire::u32_part(static_cast<std::uint32_t>(kind)), wire::json_part(message)}};
}

void raise_error(const Frame& frame) {
  PartReader r(frame);
  auto kind = static_cast<ErrorKind>(r.u32());
  std::string message = "server: " + r.json();
  switch (kind) {
    case ErrorKind::config: throw ConfigError(message);
    case ErrorKind::protocol: throw ProtocolViolation(message);
    case ErrorKind::dimension: throw DimensionMismatch(message);
    case ErrorKind::decode: throw DecodeError(message);
    default: throw Error(message);
  }
}

void expect(const Frame& frame, ProtocolId protocol, std::uint8_t s) {
  if (frame.protocol == ProtocolId::error) raise_error(frame);
  if (frame.protocol != protocol || frame.step != s) {
    throw ProtocolViolation("unexpected message " + std::string(wire::to_string(frame.protocol)) +
                            "/" + std::to_string(frame.step) + ", expected " +
                            std::string(wire::to_string(protocol)) + "/" + std::to_string(s));
  }
}

Frame encode_empty(ProtocolId protocol, const SessionId& session, std::uint8_t s) {
  return Frame{protocol, s, session, {}};
}

Frame encode_describe_response(const SessionId& session, const std::string& json) {
  return Frame{ProtocolId::describe, step::response, session, {wire::json_part(json)}};
}

std::string decode_describe_response(const Frame& frame) {
  PartReader r(frame);
  std::string s = r.json();
  r.expect_done();
  return s;
}

Frame encode_features(ProtocolId protocol, const SessionId& session,
                      const linear::EncryptedFeatures& request) {
  Frame f{protocol, step::request, session, {}};
  f.parts.push_back(wire::key_part(request.client_key));
  f.parts.push_back(wire::u32_part(static_cast<std::uint32_t>(request.ell)));
  push_all(f.parts, request.features, request.client_key);
  return f;
}

linear::EncryptedFeatures decode_features(const Frame& frame) {
  PartReader r(frame);
  PublicKey key = r.public_key();
  std::size_t ell = r.u32();
  auto cts = r.ciphertexts(r.remaining(), key);
  return linear::EncryptedFeatures{key, std::move(cts), ell};
}

Frame encode_ciphertext(ProtocolId protocol, const SessionId& session, std::uint8_t s,
                        const Ciphertext& c, const PublicKey& key) {
  return Frame{protocol, s, session, {wire::ciphertext_part(c, key)}};
}

Ciphertext decode_ciphertext(const Frame& frame, const PublicKey& key) {
  PartReader r(frame);
  Ciphertext c = r.ciphertext(key);
  r.expect_done();
  return c;
}

Frame encode_published(const SessionId& session, const linear::PublishedModel& published) {
  Frame f{ProtocolId::publish, step::response, session, {}};
  f.parts.push_back(wire::key_part(published.server_key));
  f.parts.push_back(wire::u32_part(static_cast<std::uint32_t>(published.precision)));
  f.parts.push_back(wire::u32_part(static_cast<std::uint32_t>(published.ell)));
  f.parts.push_back(wire::u32_part(static_cast<std::uint32_t>(published.kappa)));
  push_all(f.parts, published.weights, published.server_key);
  return f;
}

linear::PublishedModel decode_published(const Frame& frame) {
  PartReader r(frame);
  PublicKey key = r.public_key();
  linear::PublishedModel pub{key, {}, 0, 0, 0};
  pub.precision = r.u32();
  pub.ell = r.u32();
  pub.kappa = r.u32();
  if (r.remaining() == 0) throw DecodeError("published model without weights");
  pub.weights = r.ciphertexts(r.remaining(), key);
  return pub;
}

Frame encode_scalar(ProtocolId protocol, const SessionId& session, std::uint8_t s, const BigInt& m,
                    const PublicKey& key) {
  return Frame{protocol, s, session, {wire::scalar_part(m, key)}};
}

BigInt decode_scalar(const Frame& frame, const PublicKey& key) {
  PartReader r(frame);
  BigInt v = r.scalar(key);
  r.expect_done();
  return v;
}

Frame encode_svm_request(const SessionId& session, const linear::SvmCoreRequest& request,
                         const PublicKey& server_key) {
  Frame f{ProtocolId::svm_core, step::request, session, {}};
  f.parts.push_back(wire::ciphertext_part(request.masked, server_key));
  f.parts.push_back(wire::key_part(request.client_key));
  push_all(f.parts, request.mask_bits.encrypted_bits, request.client_key);
  return f;
}

linear::SvmCoreRequest decode_svm_request(const Frame& frame, const PublicKey& server_key) {
  PartReader r(frame);
  Ciphertext masked = r.ciphertext(server_key);
  PublicKey client = r.public_key();
  if (r.remaining() == 0) throw DecodeError("svm request without mask bits");
  comparison::ComparisonRequest bits{r.ciphertexts(r.remaining(), client)};
  return linear::SvmCoreRequest{std::move(masked), std::move(client), std::move(bits)};
}

Frame encode_comparison(ProtocolId protocol, const SessionId& session,
                        const comparison::ComparisonResponse& response, const PublicKey& key) {
  Frame f{protocol, step::response, session, {}};
  push_all(f.parts, response.blinded_values, key);
  return f;
}

comparison::ComparisonResponse decode_comparison(const Frame& frame, const PublicKey& key) {
  PartReader r(frame);
  return comparison::ComparisonResponse{r.ciphertexts(r.remaining(), key)};
}

Frame encode_network_input(ProtocolId protocol, const SessionId& session,
                           const PublicKey& client_key, const std::vector<Ciphertext>& inputs) {
  Frame f{protocol, step::input, session, {wire::key_part(client_key)}};
  push_all(f.parts, inputs, client_key);
  return f;
}

std::pair<PublicKey, std::vector<Ciphertext>> decode_network_input(const Frame& frame) {
  PartReader r(frame);
  PublicKey key = r.public_key();
  auto cts = r.ciphertexts(r.remaining(), key);
  return {std::move(key), std::move(cts)};
}

Frame encode_server_message(ProtocolId protocol, const SessionId& session,
                            const nn::ServerMessage& msg, const PublicKey& client_key) {
  Frame f{protocol, 0, session, {}};
  auto u32 = [&](std::size_t v) { f.parts.push_back(wire::u32_part(static_cast<std::uint32_t>(v))); };
  if (const auto* g = std::get_if<nn::GenericLayer>(&msg)) {
    f.step = step::generic_layer;
    u32(g->layer);
    u32(activation_code(g->activation));
    u32(g->pre_scale);
    u32(g->inner.size());
    push_all(f.parts, g->inner, client_key);
  } else if (const auto* c = std::get_if<nn::LayerChallenge>(&msg)) {
    f.step = step::layer_challenge;
    u32(c->layer);
    u32(activation_code(c->activation));
    u32(c->variant == nn::Variant::core ? 0 : 1);
    u32(c->ell);
    u32(c->units.size());
    if (c->server_key) f.parts.push_back(wire::key_part(*c->server_key));
    for (const auto& u : c->units) {
      f.parts.push_back(wire::ciphertext_part(u.masked, client_key));
      if (c->server_key) push_all(f.parts, u.mask_bits, *c->server_key);
    }
  } else {
    const auto& o = std::get<nn::NetworkOutput>(msg);
    f.step = step::output;
    u32(activation_code(o.activation));
    f.parts.push_back(wire::bit_part(o.applied));
    u32(o.scale);
    u32(o.values.size());
    push_all(f.parts, o.values, client_key);
  }
  return f;
}

nn::ServerMessage decode_server_message(const Frame& frame, const PublicKey& client_key) {
  if (frame.protocol == ProtocolId::error) raise_error(frame);
  PartReader r(frame);
  switch (frame.step) {
    case step::generic_layer: {
      nn::GenericLayer g;
      g.layer = r.u32();
      g.activation = activation_from(r.u32());
      g.pre_scale = r.u32();
      std::size_t n = checked_count(r);
      g.inner = r.ciphertexts(n, client_key);
      r.expect_done();
      return g;
    }
    case step::layer_challenge: {
      nn::LayerChallenge c;
      c.layer = r.u32();
      c.activation = activation_from(r.u32());
      std::uint32_t variant = r.u32();
      if (variant > 1) throw DecodeError("unknown variant code");
      c.variant = variant == 0 ? nn::Variant::core : nn::Variant::heuristic;
      c.ell = r.u32();
      std::size_t units = checked_count(r);
      if (c.variant == nn::Variant::core) c.server_key = r.public_key();
      std::size_t per_unit = c.variant == nn::Variant::core ? c.ell + 1 : 1;
      if (units * per_unit != r.remaining()) throw DecodeError("layer challenge size mismatch");
      for (std::size_t j = 0; j < units; ++j) {
        nn::UnitChallenge u;
        u.masked = r.ciphertext(client_key);
        if (c.server_key) u.mask_bits = r.ciphertexts(c.ell, *c.server_key);
        c.units.push_back(std::move(u));
      }
      r.expect_done();
      return c;
    }
    case step::output: {
      nn::NetworkOutput o;
      o.activation = activation_from(r.u32());
      o.applied = r.bit();
      o.scale = r.u32();
      std::size_t n = checked_count(r);
      o.values = r.ciphertexts(n, client_key);
      r.expect_done();
      return o;
    }
    default:
      throw ProtocolViolation("unexpected network step " + std::to_string(frame.step));
  }
}

Frame encode_client_message(ProtocolId protocol, const SessionId& session,
                            const nn::ClientMessage& msg, const PublicKey& client_key,
                            const PublicKey* server_key) {
  Frame f{protocol, 0, session, {}};
  auto u32 = [&](std::size_t v) { f.parts.push_back(wire::u32_part(static_cast<std::uint32_t>(v))); };
  if (const auto* g = std::get_if<nn::GenericReply>(&msg)) {
    f.step = step::generic_reply;
    u32(g->layer);
    u32(g->activations.size());
    push_all(f.parts, g->activations, client_key);
  } else {
    const auto& l = std::get<nn::LayerReply>(msg);
    f.step = step::layer_reply;
    u32(l.layer);
    u32(l.units.size());
    for (const auto& u : l.units) {
      u32(u.values.size());
      push_all(f.parts, u.values, client_key);
      u32(u.comparison.size());
      if (!u.comparison.empty()) {
        if (!server_key) throw ConfigError("comparison values need the server key");
        push_all(f.parts, u.comparison, *server_key);
      }
    }
  }
  return f;
}

nn::ClientMessage decode_client_message(const Frame& frame, const PublicKey& client_key,
                                        const PublicKey* server_key) {
  PartReader r(frame);
  if (frame.step == step::generic_reply) {
    nn::GenericReply g;
    g.layer = r.u32();
    std::size_t n = checked_count(r);
    g.activations = r.ciphertexts(n, client_key);
    r.expect_done();
    return g;
  }
  if (frame.step != step::layer_reply) {
    throw ProtocolViolation("unexpected network step " + std::to_string(frame.step));
  }
  nn::LayerReply l;
  l.layer = r.u32();
  std::size_t units = checked_count(r);
  for (std::size_t j = 0; j < units; ++j) {
    nn::UnitReply u;
    std::size_t nv = checked_count(r);
    u.values = r.ciphertexts(nv, client_key);
    std::size_t nc = checked_count(r);
    if (nc > 0) {
      if (!server_key) throw ProtocolViolation("unexpected comparison values");
      u.comparison = r.ciphertexts(nc, *server_key);
    }
    l.units.push_back(std::move(u));
  }
  r.expect_done();
  return l;
}

}  // namespace privml::messages

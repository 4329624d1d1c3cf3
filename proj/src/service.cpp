#include "privml/service.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "privml/errors.hpp"
#include "privml/masking.hpp"
#include "privml/messages.hpp"
#include "privml/nnprotocols.hpp"

namespace privml::service {

using json = nlohmann::json;
using wire::ProtocolId;
namespace step = messages::step;

std::vector<ProtocolId> protocols_for(model_io::ModelType type) {
  switch (type) {
    case model_io::ModelType::linear:
    case model_io::ModelType::logistic:
      return {ProtocolId::regr_core, ProtocolId::regr_dual};
    case model_io::ModelType::svm:
      return {ProtocolId::svm_core, ProtocolId::svm_heur};
    case model_io::ModelType::ffnn:
      return {ProtocolId::ffnn_generic, ProtocolId::ffnn_encrypted};
  }
  return {};
}

ModelServer::ModelServer(model_io::Model model, paillier::Keypair keys, ServerOptions options,
                         RandomSource& rng)
    : model_(std::move(model)), keys_(std::move(keys)), options_(std::move(options)), rng_(rng) {
  if (options_.protocols.empty()) options_.protocols = protocols_for(model_.type);
  auto allowed = protocols_for(model_.type);
  for (auto p : options_.protocols) {
    if (std::find(allowed.begin(), allowed.end(), p) == allowed.end()) {
      throw ConfigError("protocol " + std::string(wire::to_string(p)) + " cannot serve a " +
                        std::string(model_io::to_string(model_.type)) + " model");
    }
    if (p == ProtocolId::svm_core) {
      masking::require_core_capacity(keys_.pub.n(), model_.linear->ell(), model_.kappa);
    }
    if (p == ProtocolId::ffnn_encrypted) {
      model_.network->require_encrypted_activations();
    }
  }
}

bool ModelServer::serves(ProtocolId p) const {
  return std::find(options_.protocols.begin(), options_.protocols.end(), p) !=
         options_.protocols.end();
}

std::string ModelServer::describe_json() const {
  json j;
  j["model_type"] = std::string(model_io::to_string(model_.type));
  json protos = json::array();
  for (auto p : options_.protocols) protos.push_back(std::string(wire::to_string(p)));
  j["protocols"] = protos;
  j["precision"] = model_.precision;
  j["kappa"] = model_.kappa;
  j["input_dim"] = model_.input_dim();
  j["activation"] = std::string(to_string(model_.activation));
  j["key_bits"] = keys_.pub.bit_length();
  j["variant"] = std::string(network::to_string(options_.variant));
  if (model_.linear) j["ell"] = model_.linear->ell();
  if (model_.network) {
    json layers = json::array();
    for (const auto& l : model_.network->layers()) {
      layers.push_back({{"units", l.units()}, {"activation", std::string(to_string(l.activation))}});
    }
    j["layers"] = layers;
    j["reveal_output"] = model_.network->reveal_output();
  }
  return j.dump();
}

const linear::PublishedModel& ModelServer::published() {
  std::lock_guard lock(publish_mu_);
  if (!published_) published_ = linear::publish_model(*model_.linear, keys_.pub, model_.kappa, rng_);
  return *published_;
}

namespace {

messages::ErrorKind kind_of(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const RangeError*>(&e)) {
    return messages::ErrorKind::config;
  }
  if (dynamic_cast<const ProtocolViolation*>(&e) || dynamic_cast<const KeyMismatch*>(&e) ||
      dynamic_cast<const DecryptionError*>(&e)) {
    return messages::ErrorKind::protocol;
  }
  if (dynamic_cast<const DimensionMismatch*>(&e)) return messages::ErrorKind::dimension;
  if (dynamic_cast<const DecodeError*>(&e)) return messages::ErrorKind::decode;
  return messages::ErrorKind::other;
}

struct NetworkSession {
  nn::ServerSession server;
  paillier::PublicKey client_key;
};

}  // namespace

void ModelServer::serve_connection(channel::Channel& ch) {
  std::map<wire::SessionId, std::unique_ptr<NetworkSession>> sessions;
  for (;;) {
    wire::Frame in;
    try {
      in = ch.receive();
    } catch (const channel::ChannelClosed&) {
      return;
    } catch (const DecodeError& e) {
      try {
        ch.send(messages::encode_error({}, messages::ErrorKind::decode, e.what()));
      } catch (const channel::ChannelClosed&) {
      }
      return;
    }

    const auto sid = in.session;
    try {
      if (in.protocol == ProtocolId::describe) {
        ch.send(messages::encode_describe_response(sid, describe_json()));
        continue;
      }
      if (in.protocol == ProtocolId::publish) {
        if (!serves(ProtocolId::regr_dual) && !serves(ProtocolId::svm_core)) {
          throw ConfigError("this server publishes no model");
        }
        ch.send(messages::encode_published(sid, published()));
        continue;
      }
      if (!serves(in.protocol)) {
        throw ConfigError("protocol " + std::string(wire::to_string(in.protocol)) + " is not served");
      }

      switch (in.protocol) {
        case ProtocolId::regr_core: {
          messages::expect(in, in.protocol, step::request);
          auto req = messages::decode_features(in);
          auto t = linear::regr_core_respond(*model_.linear, req, rng_);
          ch.send(messages::encode_ciphertext(in.protocol, sid, step::response, t, req.client_key));
          break;
        }
        case ProtocolId::svm_heur: {
          messages::expect(in, in.protocol, step::request);
          auto req = messages::decode_features(in);
          auto t = linear::svm_heur_respond(*model_.linear, req, model_.kappa, rng_);
          ch.send(messages::encode_ciphertext(in.protocol, sid, step::response, t, req.client_key));
          break;
        }
        case ProtocolId::regr_dual: {
          messages::expect(in, in.protocol, step::request);
          auto c = messages::decode_ciphertext(in, keys_.pub);
          BigInt t = linear::regr_dual_respond(keys_.sec, c);
          ch.send(messages::encode_scalar(in.protocol, sid, step::response, t, keys_.pub));
          break;
        }
        case ProtocolId::svm_core: {
          messages::expect(in, in.protocol, step::request);
          auto req = messages::decode_svm_request(in, keys_.pub);
          auto resp = linear::svm_core_respond(keys_.sec, req, model_.linear->ell(), model_.kappa, rng_);
          ch.send(messages::encode_comparison(in.protocol, sid, resp, req.client_key));
          break;
        }
        case ProtocolId::ffnn_generic:
        case ProtocolId::ffnn_encrypted: {
          nn::ServerMessage out;
          NetworkSession* session = nullptr;
          if (in.step == step::input) {
            auto [client_key, inputs] = messages::decode_network_input(in);
            auto mode = in.protocol == ProtocolId::ffnn_generic ? nn::Mode::generic : nn::Mode::encrypted;
            auto s = std::make_unique<NetworkSession>(NetworkSession{
                nn::ServerSession(*model_.network, mode, options_.variant, &keys_.sec, model_.kappa, rng_),
                client_key});
            session = s.get();
            sessions[sid] = std::move(s);
            out = session->server.start(session->client_key, std::move(inputs));
          } else {
            auto it = sessions.find(sid);
            if (it == sessions.end()) throw ProtocolViolation("unknown network session " + wire::to_hex(sid));
            session = it->second.get();
            auto reply = messages::decode_client_message(in, session->client_key, &keys_.pub);
            out = session->server.on_reply(reply);
          }
          auto frame = messages::encode_server_message(in.protocol, sid, out, session->client_key);
          if (session->server.finished()) sessions.erase(sid);
          ch.send(frame);
          break;
        }
        default:
          throw ProtocolViolation("unexpected protocol " + std::string(wire::to_string(in.protocol)));
      }
    } catch (const channel::ChannelClosed&) {
      return;
    } catch (const std::exception& e) {
      sessions.erase(sid);
      try {
        ch.send(messages::encode_error(sid, kind_of(e), e.what()));
      } catch (const channel::ChannelClosed&) {
        return;
      }
    }
  }
}

void ModelServer::serve(channel::TcpListener& listener, std::size_t max_connections) {
  std::vector<std::thread> workers;
  while (max_connections == 0 || workers.size() < max_connections) {
    auto conn = listener.accept();
    if (!conn) break;
    workers.emplace_back([this, c = std::shared_ptr<channel::TcpChannel>(std::move(conn))] {
      serve_connection(*c);
    });
  }
  for (auto& w : workers) w.join();
}

ModelInfo parse_describe(const std::string& json_text) {
  try {
    json j = json::parse(json_text);
    ModelInfo info;
    info.type = model_io::parse_model_type(j.at("model_type").get<std::string>());
    for (const auto& p : j.at("protocols")) info.protocols.push_back(wire::parse_protocol(p.get<std::string>()));
    info.precision = j.at("precision").get<std::size_t>();
    info.kappa = j.at("kappa").get<std::size_t>();
    info.input_dim = j.at("input_dim").get<std::size_t>();
    info.activation = parse_activation(j.at("activation").get<std::string>());
    info.ell = j.value("ell", std::size_t{0});
    info.variant = network::parse_variant(j.value("variant", std::string("core")));
    info.key_bits = j.value("key_bits", std::size_t{0});
    return info;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("malformed model description: ") + e.what());
  }
}

ModelInfo ModelClient::describe() {
  auto sid = wire::random_session_id(rng_);
  ch_.send(messages::encode_empty(ProtocolId::describe, sid, step::request));
  auto f = ch_.receive();
  messages::expect(f, ProtocolId::describe, step::response);
  return parse_describe(messages::decode_describe_response(f));
}

linear::PublishedModel ModelClient::publish(wire::Transcript* transcript) {
  auto sid = wire::random_session_id(rng_);
  auto req = messages::encode_empty(ProtocolId::publish, sid, step::request);
  ch_.send(req);
  auto f = ch_.receive();
  messages::expect(f, ProtocolId::publish, step::response);
  if (transcript) {
    transcript->record(wire::Direction::client_to_server, req, wire::encode_frame(req).size());
    transcript->record(wire::Direction::server_to_client, f, wire::encode_frame(f).size());
  }
  return messages::decode_published(f);
}

QueryResult ModelClient::query(ProtocolId protocol, const paillier::Keypair& client_keys,
                               const ModelInfo& info, std::span<const double> input,
                               const linear::PublishedModel* published) {
  if (std::find(info.protocols.begin(), info.protocols.end(), protocol) == info.protocols.end()) {
    throw ConfigError("server does not offer " + std::string(wire::to_string(protocol)));
  }
  if (input.size() != info.input_dim) {
    throw DimensionMismatch("model expects " + std::to_string(info.input_dim) + " features, input has " +
                            std::to_string(input.size()));
  }
  QueryResult result;
  channel::RecordingChannel ch(ch_, wire::Direction::client_to_server, result.transcript);
  const auto sid = wire::random_session_id(rng_);
  const auto& pk = client_keys.pub;
  const auto& sk = client_keys.sec;
  auto x = linear::FeatureVector::encode(input, info.precision);

  auto need_published = [&]() -> const linear::PublishedModel& {
    if (!published) throw ConfigError(std::string(wire::to_string(protocol)) + " needs the published model");
    if (published->dimension() != info.input_dim) throw DimensionMismatch("published model dimension differs");
    return *published;
  };

  switch (protocol) {
    case ProtocolId::regr_core: {
      ch.send(messages::encode_features(protocol, sid, linear::regr_core_request(pk, x, rng_)));
      auto f = ch.receive();
      messages::expect(f, protocol, step::response);
      auto t = messages::decode_ciphertext(f, pk);
      result.outputs.push_back(linear::regr_core_finish(sk, t, info.activation, info.precision));
      break;
    }
    case ProtocolId::regr_dual: {
      const auto& pub = need_published();
      auto [c, session] = linear::regr_dual_request(pub, x, rng_);
      ch.send(messages::encode_ciphertext(protocol, sid, step::request, c, pub.server_key));
      auto f = ch.receive();
      messages::expect(f, protocol, step::response);
      BigInt t_star = messages::decode_scalar(f, pub.server_key);
      result.outputs.push_back(session.finish(t_star, info.activation));
      break;
    }
    case ProtocolId::svm_core: {
      const auto& pub = need_published();
      auto [req, session] = linear::svm_core_request(pub, pk, x, rng_);
      ch.send(messages::encode_svm_request(sid, req, pub.server_key));
      auto f = ch.receive();
      messages::expect(f, protocol, step::response);
      int y = session.finish(sk, messages::decode_comparison(f, pk));
      result.outputs.push_back(Prediction{0, static_cast<double>(y), y});
      break;
    }
    case ProtocolId::svm_heur: {
      auto req = linear::regr_core_request(pk, x, rng_);
      req.ell = linear::effective_ell(info.ell, info.precision, x);
      ch.send(messages::encode_features(protocol, sid, req));
      auto f = ch.receive();
      messages::expect(f, protocol, step::response);
      int y = linear::svm_heur_finish(sk, messages::decode_ciphertext(f, pk));
      result.outputs.push_back(Prediction{0, static_cast<double>(y), y});
      break;
    }
    case ProtocolId::ffnn_generic:
    case ProtocolId::ffnn_encrypted: {
      for (double v : input) {
        if (std::fabs(v) > 1.0) throw ConfigError("network inputs must lie in [-1, 1]");
      }
      nn::ClientSession client(sk, info.precision, rng_);
      ch.send(messages::encode_network_input(protocol, sid, pk, client.start(x)));
      std::optional<paillier::PublicKey> server_key;
      for (;;) {
        auto f = ch.receive();
        if (f.protocol != ProtocolId::error && (f.protocol != protocol || f.session != sid)) {
          throw ProtocolViolation("network message for another session");
        }
        auto msg = messages::decode_server_message(f, pk);
        if (const auto* c = std::get_if<nn::LayerChallenge>(&msg); c && c->server_key) {
          server_key = c->server_key;
        }
        auto reply = client.on_message(msg);
        if (!reply) break;
        ch.send(messages::encode_client_message(protocol, sid, *reply, pk,
                                                server_key ? &*server_key : nullptr));
      }
      result.outputs = client.outputs();
      break;
    }
    default:
      throw ConfigError("not an inference protocol: " + std::string(wire::to_string(protocol)));
  }
  return result;
}

}  // namespace privml::service

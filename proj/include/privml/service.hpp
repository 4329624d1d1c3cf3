#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "privml/channel.hpp"
#include "privml/linear.hpp"
#include "privml/model_io.hpp"
#include "privml/network.hpp"
#include "privml/paillier.hpp"
#include "privml/prediction.hpp"
#include "privml/random.hpp"
#include "privml/wire.hpp"

/// Model-hosting server and inference client over any channel.
namespace privml::service {

struct ServerOptions {
  std::vector<wire::ProtocolId> protocols;
  /// Variant of the encrypted network protocols.
  network::Variant variant = network::Variant::core;
};

/// Protocols a model type can be served with.
std::vector<wire::ProtocolId> protocols_for(model_io::ModelType type);

class ModelServer {
 public:
  /// Validates the configuration: protocol/model compatibility, activations
  /// for encrypted networks, and server-key sizing for svm-core. Throws
  /// ConfigError rather than serving an insecure or incorrect setup.
  ModelServer(model_io::Model model, paillier::Keypair keys, ServerOptions options,
              RandomSource& rng);

  const model_io::Model& model() const { return model_; }
  const paillier::PublicKey& public_key() const { return keys_.pub; }
  std::string describe_json() const;
  bool serves(wire::ProtocolId p) const;

  /// Handles frames until the peer disconnects.
  void serve_connection(channel::Channel& ch);
  /// Accepts connections until the listener is closed (or, when nonzero,
  /// `max_connections` were accepted), one thread each.
  void serve(channel::TcpListener& listener, std::size_t max_connections = 0);

 private:
  const linear::PublishedModel& published();

  model_io::Model model_;
  paillier::Keypair keys_;
  ServerOptions options_;
  RandomSource& rng_;
  std::mutex publish_mu_;
  std::optional<linear::PublishedModel> published_;
};

/// Public model metadata as announced by the server.
struct ModelInfo {
  model_io::ModelType type = model_io::ModelType::linear;
  std::vector<wire::ProtocolId> protocols;
  std::size_t precision = 0;
  std::size_t kappa = 0;
  std::size_t input_dim = 0;
  Activation activation = Activation::identity;
  /// Linear models only.
  std::size_t ell = 0;
  network::Variant variant = network::Variant::core;
  std::size_t key_bits = 0;
};

ModelInfo parse_describe(const std::string& json_text);

struct QueryResult {
  std::vector<Prediction> outputs;
  /// Frames of the query itself (publication and description excluded).
  wire::Transcript transcript;
};

class ModelClient {
 public:
  ModelClient(channel::Channel& ch, RandomSource& rng) : ch_(ch), rng_(rng) {}

  ModelInfo describe();
  linear::PublishedModel publish(wire::Transcript* transcript = nullptr);

  /// Runs one private inference. `published` is required for regr-dual and
  /// svm-core. Inputs are reals, encoded at the model precision.
  QueryResult query(wire::ProtocolId protocol, const paillier::Keypair& client_keys,
                    const ModelInfo& info, std::span<const double> input,
                    const linear::PublishedModel* published = nullptr);

 private:
  channel::Channel& ch_;
  RandomSource& rng_;
};

/// Runs `server` on one end of an in-process channel pair while `client_fn`
/// uses the other.
template <typename F>
auto with_loopback(ModelServer& server, F&& client_fn) {
  auto [client_end, server_end] = channel::make_loopback_pair();
  std::thread t([&server, &ch = *server_end] { server.serve_connection(ch); });
  struct Joiner {
    channel::Channel& ch;
    std::thread& t;
    ~Joiner() {
      ch.close();
      t.join();
    }
  } joiner{*client_end, t};
  return client_fn(*client_end);
}

}  // namespace privml::service

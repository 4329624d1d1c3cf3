#include <filesystem>
#include <thread>

#include <doctest.h>

#include "privml/channel.hpp"
#include "privml/errors.hpp"
#include "privml/messages.hpp"
#include "privml/model_io.hpp"
#include "privml/reference.hpp"
#include "privml/service.hpp"
#include "support.hpp"

using namespace privml;
using namespace privml::service;
using wire::ProtocolId;

namespace {

const char* kLinearJson = R"({
  "format_version": 1, "model_type": "linear", "precision": 20, "kappa": 40,
  "real_weights": [0.25, -0.5, 0.75, 0.125]
})";

const char* kSvmJson = R"({
  "format_version": 1, "model_type": "svm", "precision": 20, "kappa": 40,
  "real_weights": [-0.125, 0.5, -0.75, 0.25]
})";

const char* kNetJson = R"({
  "format_version": 1, "model_type": "ffnn", "precision": 8, "kappa": 40, "input_dim": 2,
  "layers": [
    {"activation": "relu", "real_weights": [[0.1, 0.5, -0.5], [-0.2, 0.25, 0.75], [0.0, -1.0, 0.5]]},
    {"activation": "identity", "real_weights": [[0.05, 1.0, -0.5, 0.25]]}
  ]
})";

std::vector<double> kInput{0.5, -0.25, 0.75};
std::vector<double> kNetInput{0.5, -0.25};

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("privml_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

Prediction oracle(const model_io::Model& m, std::span<const double> in) {
  auto x = linear::FeatureVector::encode(in, m.precision);
  if (m.network) return reference::eval_ffnn(*m.network, x)[0];
  return reference::eval_linear(*m.linear, x, m.activation);
}

QueryResult run(const char* json, ProtocolId p, std::span<const double> in,
                network::Variant v = network::Variant::core) {
  auto model = model_io::parse_model(json);
  ModelServer server(model, test::server_keys(), {{p}, v}, test::rng());
  return with_loopback(server, [&](channel::Channel& ch) {
    ModelClient client(ch, test::rng());
    auto info = client.describe();
    std::optional<linear::PublishedModel> pub;
    if (p == ProtocolId::regr_dual || p == ProtocolId::svm_core) pub = client.publish();
    return client.query(p, test::client_keys(), info, in, pub ? &*pub : nullptr);
  });
}

}  // namespace

TEST_CASE("model parsing") {
  auto m = model_io::parse_model(kLinearJson);
  CHECK(m.type == model_io::ModelType::linear);
  CHECK(m.precision == 20);
  CHECK(m.input_dim() == 3);
  CHECK(m.linear->theta()[0] == BigInt(1) << 38);
  auto again = model_io::parse_model(model_io::model_to_json(m));
  CHECK(again.linear->theta() == m.linear->theta());
  auto net = model_io::parse_model(kNetJson);
  CHECK(net.network->depth() == 2);
  auto net_again = model_io::parse_model(model_io::model_to_json(net));
  CHECK(net_again.network->layer(0).weights == net.network->layer(0).weights);
  CHECK_THROWS_AS(model_io::parse_model("{"), ConfigError);
  CHECK_THROWS_AS(model_io::parse_model(R"({"format_version": 2, "model_type": "svm"})"), ConfigError);
  CHECK_THROWS_AS(model_io::parse_model(R"({"format_version": 1, "model_type": "tree"})"), ConfigError);
  CHECK_THROWS_AS(model_io::parse_model(
                      R"({"format_version": 1, "model_type": "linear", "weights": ["1", "x"]})"),
                  Error);
}

TEST_CASE("input parsing") {
  auto v = model_io::parse_input("# features\n0.5\n\n-0.25\n");
  CHECK(v == std::vector<double>{0.5, -0.25});
  CHECK_THROWS_WITH_AS(model_io::parse_input("0.5\nabc\n"), doctest::Contains("line 2"), DecodeError);
  CHECK_THROWS_AS(model_io::parse_input("1.5\n"), DecodeError);
  CHECK(model_io::parse_input("1.5\n", true) == std::vector<double>{1.5});
}

TEST_CASE("key files round trip") {
  auto base = (temp_dir() / "keys").string();
  model_io::write_keypair(base, test::client_keys());
  auto k = model_io::read_keypair(base);
  CHECK(k.pub == test::client_keys().pub);
  CHECK(model_io::read_public_key(base + ".pub") == test::client_keys().pub);
  CHECK(model_io::read_secret_key(base + ".sec").p() == test::client_keys().sec.p());
  CHECK_THROWS_AS(model_io::read_secret_key(base + ".pub"), Error);
  CHECK_THROWS_AS(model_io::read_keypair(base + ".missing"), ConfigError);
}

TEST_CASE("every linear protocol over loopback matches the oracle") {
  auto lin = model_io::parse_model(kLinearJson);
  auto svm = model_io::parse_model(kSvmJson);
  for (auto p : {ProtocolId::regr_core, ProtocolId::regr_dual}) {
    auto r = run(kLinearJson, p, kInput);
    REQUIRE(r.outputs.size() == 1);
    CHECK(r.outputs[0].raw == oracle(lin, kInput).raw);
    CHECK(wire::transcript_stats(r.transcript).round_trips == 1);
  }
  for (auto p : {ProtocolId::svm_core, ProtocolId::svm_heur}) {
    auto r = run(kSvmJson, p, kInput);
    CHECK(r.outputs[0].class_label == oracle(svm, kInput).class_label);
    CHECK(wire::transcript_stats(r.transcript).round_trips == 1);
  }
}

TEST_CASE("network protocols over loopback match the oracle") {
  auto net = model_io::parse_model(kNetJson);
  auto expected = oracle(net, kNetInput);
  for (auto v : {network::Variant::core, network::Variant::heuristic}) {
    auto r = run(kNetJson, ProtocolId::ffnn_encrypted, kNetInput, v);
    CHECK(r.outputs[0].raw == expected.raw);
  }
  auto g = run(kNetJson, ProtocolId::ffnn_generic, kNetInput);
  CHECK(g.outputs[0].raw == expected.raw);
  // Input, one hidden layer, output.
  CHECK(wire::transcript_stats(g.transcript).round_trips == 2);
}

TEST_CASE("server refuses unsuitable configurations") {
  auto svm = model_io::parse_model(kSvmJson);
  CHECK_THROWS_AS(ModelServer(svm, test::server_keys(), {{ProtocolId::regr_core}}, test::rng()), ConfigError);
  auto tiny = paillier::generate_keypair(64, test::rng());
  CHECK_THROWS_AS(ModelServer(svm, tiny, {{ProtocolId::svm_core}}, test::rng()), ConfigError);
}

TEST_CASE("unserved protocols produce an error frame") {
  auto model = model_io::parse_model(kLinearJson);
  ModelServer server(model, test::server_keys(), {{ProtocolId::regr_core}}, test::rng());
  CHECK(server.serves(ProtocolId::regr_core));
  CHECK_FALSE(server.serves(ProtocolId::regr_dual));
  with_loopback(server, [&](channel::Channel& ch) {
    ModelClient client(ch, test::rng());
    auto info = client.describe();
    CHECK(info.input_dim == 3);
    CHECK(info.key_bits == 512);
    CHECK_THROWS_AS(client.publish(), ConfigError);
    // The connection survives the error.
    auto r = client.query(ProtocolId::regr_core, test::client_keys(), info, kInput);
    CHECK(r.outputs.size() == 1);
    std::vector<double> wrong{0.5};
    CHECK_THROWS_AS(client.query(ProtocolId::regr_core, test::client_keys(), info, wrong), DimensionMismatch);
    return 0;
  });
}

TEST_CASE("tcp transport") {
  auto model = model_io::parse_model(kLinearJson);
  ModelServer server(model, test::server_keys(), {{ProtocolId::regr_core}}, test::rng());
  channel::TcpListener listener("127.0.0.1", 0);
  std::thread t([&] { server.serve(listener, 1); });
  {
    auto ch = channel::TcpChannel::connect("127.0.0.1", listener.port());
    ModelClient client(*ch, test::rng());
    auto info = client.describe();
    auto r = client.query(ProtocolId::regr_core, test::client_keys(), info, kInput);
    CHECK(r.outputs[0].raw == oracle(model, kInput).raw);
  }
  t.join();
  CHECK(channel::parse_endpoint("localhost:7000") == std::pair<std::string, std::uint16_t>{"localhost", 7000});
  CHECK_THROWS_AS(channel::parse_endpoint("nope"), ConfigError);
}

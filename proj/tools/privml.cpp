// privml: key generation, model hosting, private inference, plaintext
// oracle and bandwidth benchmark.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "privml/bandwidth.hpp"
#include "privml/channel.hpp"
#include "privml/errors.hpp"
#include "privml/fixedpoint.hpp"
#include "privml/masking.hpp"
#include "privml/model_io.hpp"
#include "privml/reference.hpp"
#include "privml/service.hpp"

using namespace privml;
using wire::ProtocolId;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitMismatch = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitConfig = 4;

constexpr std::size_t kProductionBits[] = {2048, 3072};

bool production_size(std::size_t bits) {
  for (auto b : kProductionBits) {
    if (b == bits) return true;
  }
  return false;
}

void require_key_size(std::size_t bits, bool insecure_ok, const std::string& what) {
  if (production_size(bits)) return;
  if (!insecure_ok) {
    throw ConfigError(what + " has " + std::to_string(bits) +
                      " bits; only 2048 or 3072 are accepted without --insecure-test-keys");
  }
}

bool is_heuristic(ProtocolId p, network::Variant v) {
  return p == ProtocolId::svm_heur || (p == ProtocolId::ffnn_encrypted && v == network::Variant::heuristic);
}

void require_heuristic_ack(ProtocolId p, network::Variant v, bool ack) {
  if (is_heuristic(p, v) && !ack) {
    throw ConfigError(std::string(wire::to_string(p)) +
                      " (heuristic variant) leaks information about the inner product to the "
                      "client; pass --heuristic to accept this");
  }
}

std::string format_prediction(const Prediction& p) {
  if (p.class_label) return *p.class_label > 0 ? "+1" : "-1";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", p.value);
  return buf;
}

bool same_prediction(const Prediction& a, const Prediction& b, model_io::ModelType type) {
  if (type == model_io::ModelType::svm) return a.class_label == b.class_label;
  return a.raw == b.raw && a.value == b.value && a.class_label == b.class_label;
}

std::vector<Prediction> oracle_predictions(const model_io::Model& model, std::span<const double> input) {
  auto x = linear::FeatureVector::encode(input, model.precision);
  if (model.network) return reference::eval_ffnn(*model.network, x);
  if (x.dimension() != model.linear->dimension()) {
    throw DimensionMismatch("model expects " + std::to_string(model.linear->dimension()) +
                            " features, input has " + std::to_string(x.dimension()));
  }
  return {reference::eval_linear(*model.linear, x, model.activation)};
}

paillier::Keypair load_or_generate(const std::string& path, std::size_t bits, RandomSource& rng) {
  if (!path.empty()) return model_io::read_keypair(path);
  return paillier::generate_keypair(bits, rng);
}

// --- keygen ----------------------------------------------------------------

struct KeygenArgs {
  std::size_t bits = 2048;
  std::string out;
  std::size_t kappa = masking::kDefaultKappa;
  std::optional<std::size_t> ell;
  bool insecure = false;
};

int cmd_keygen(const KeygenArgs& a) {
  require_key_size(a.bits, a.insecure, "requested key");
  auto keys = paillier::generate_keypair(a.bits, system_random());
  model_io::write_keypair(a.out, keys);
  long max_ell = masking::max_core_ell(keys.pub.n(), a.kappa);
  std::cout << "wrote " << a.out << ".pub and " << a.out << ".sec\n";
  std::cout << "l_M = " << keys.pub.bit_length() << "\n";
  std::cout << "max ell for svm-core at kappa = " << a.kappa << ": " << max_ell << "\n";
  if (a.ell) {
    if (static_cast<long>(*a.ell) <= max_ell) {
      std::cout << "ell = " << *a.ell << " fits: M >= 2^ell (2^kappa + 1) - 1 holds\n";
    } else {
      std::cout << "warning: ell = " << *a.ell
                << " violates M >= 2^ell (2^kappa + 1) - 1; svm-core hosting will be refused\n";
      return kExitConfig;
    }
  }
  return kExitOk;
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string model;
  std::string keys;
  std::string listen = "127.0.0.1:7000";
  std::vector<std::string> protocols;
  std::string variant = "core";
  bool heuristic = false;
  bool insecure = false;
  std::size_t connections = 0;
};

channel::TcpListener* g_listener = nullptr;

extern "C" void on_signal(int) {
  if (g_listener) g_listener->close();
}

int cmd_serve(const ServeArgs& a) {
  auto model = model_io::load_model(a.model);
  auto keys = model_io::read_keypair(a.keys);
  require_key_size(keys.pub.bit_length(), a.insecure, "server key");
  service::ServerOptions opts;
  opts.variant = network::parse_variant(a.variant);
  for (const auto& p : a.protocols) {
    auto id = wire::parse_protocol(p);
    require_heuristic_ack(id, opts.variant, a.heuristic);
    opts.protocols.push_back(id);
  }
  if (opts.protocols.empty()) throw ConfigError("at least one --protocol is required");
  service::ModelServer server(std::move(model), std::move(keys), opts, system_random());

  auto [host, port] = channel::parse_endpoint(a.listen);
  channel::TcpListener listener(host, port);
  g_listener = &listener;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on " << host << ":" << listener.port() << std::endl;
  server.serve(listener, a.connections);
  g_listener = nullptr;
  return kExitOk;
}

// --- infer -----------------------------------------------------------------

struct InferArgs {
  std::string server;
  bool loopback = false;
  std::string model;
  std::string server_keys;
  std::string input;
  std::string protocol;
  std::string keys;
  std::size_t key_bits = 2048;
  std::string verify;
  std::string variant = "core";
  bool allow_unscaled = false;
  bool heuristic = false;
  bool insecure = false;
  bool stats = false;
};

int cmd_infer(const InferArgs& a) {
  auto protocol = wire::parse_protocol(a.protocol);
  auto variant = network::parse_variant(a.variant);
  if (protocol != ProtocolId::ffnn_encrypted && a.variant != "core") {
    throw ConfigError("--variant applies to ffnn-encrypted only");
  }
  require_heuristic_ack(protocol, variant, a.heuristic);
  auto input = model_io::read_input(a.input, a.allow_unscaled);
  auto& rng = system_random();

  auto client_keys = load_or_generate(a.keys, a.key_bits, rng);
  require_key_size(client_keys.pub.bit_length(), a.insecure, "client key");

  auto run = [&](channel::Channel& ch) {
    service::ModelClient client(ch, rng);
    auto info = client.describe();
    if (is_heuristic(protocol, info.variant) && !a.heuristic) {
      throw ConfigError("server runs the heuristic variant; pass --heuristic to accept its leakage");
    }
    std::optional<linear::PublishedModel> published;
    if (protocol == ProtocolId::regr_dual || protocol == ProtocolId::svm_core) {
      published = client.publish();
      require_key_size(published->server_key.bit_length(), a.insecure, "server key");
    }
    return client.query(protocol, client_keys, info, input, published ? &*published : nullptr);
  };

  service::QueryResult result;
  if (a.loopback) {
    if (a.model.empty()) throw ConfigError("--loopback needs --model");
    auto model = model_io::load_model(a.model);
    auto server_keys = load_or_generate(a.server_keys, client_keys.pub.bit_length(), rng);
    service::ServerOptions opts{{protocol}, variant};
    service::ModelServer server(std::move(model), std::move(server_keys), opts, rng);
    result = service::with_loopback(server, run);
  } else {
    if (a.server.empty()) throw ConfigError("either --server or --loopback is required");
    auto [host, port] = channel::parse_endpoint(a.server);
    auto ch = channel::TcpChannel::connect(host, port);
    result = run(*ch);
  }

  for (const auto& p : result.outputs) std::cout << format_prediction(p) << "\n";
  if (a.stats) {
    auto s = wire::transcript_stats(result.transcript);
    std::cout << "bytes_up " << s.bytes_up << " bytes_down " << s.bytes_down << " round_trips "
              << s.round_trips << "\n";
  }

  if (!a.verify.empty()) {
    auto model = model_io::load_model(a.verify);
    auto expected = oracle_predictions(model, input);
    bool ok = expected.size() == result.outputs.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i) {
      ok = same_prediction(expected[i], result.outputs[i], model.type);
    }
    if (!ok) {
      std::cerr << "verification mismatch: oracle gives";
      for (const auto& p : expected) std::cerr << " " << format_prediction(p);
      std::cerr << "\n";
      return kExitMismatch;
    }
    std::cout << "verified against oracle\n";
  }
  return kExitOk;
}

// --- oracle ----------------------------------------------------------------

struct OracleArgs {
  std::string model;
  std::string input;
  bool allow_unscaled = false;
};

int cmd_oracle(const OracleArgs& a) {
  auto model = model_io::load_model(a.model);
  auto input = model_io::read_input(a.input, a.allow_unscaled);
  for (const auto& p : oracle_predictions(model, input)) std::cout << format_prediction(p) << "\n";
  return kExitOk;
}

// --- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string protocol;
  std::size_t d = 30;
  std::size_t ell_m = 2048;
  std::size_t layers = 3;
  std::size_t precision = 53;
  std::size_t kappa = masking::kDefaultKappa;
  std::string activation = "sign";
  std::string variant = "core";
  std::uint64_t seed = 1;
  bool heuristic = false;
};

double uniform_real(RandomSource& rng) {
  // Uniform multiple of 2^-20 in [-1, 1].
  BigInt v = uniform_between(rng, -(BigInt(1) << 20), BigInt(1) << 20);
  return std::ldexp(v.get_d(), -20);
}

struct Expected {
  std::size_t up = 0;
  std::size_t down = 0;
  std::size_t bits_up = 0;
  std::size_t bits_down = 0;
};

void add(Expected& e, const bandwidth::Estimate& est, std::size_t times, std::size_t l_m) {
  e.up += est.up.ciphertexts * times;
  e.down += est.down.ciphertexts * times;
  e.bits_up += est.up.bits(l_m) * times;
  e.bits_down += est.down.bits(l_m) * times;
}

int cmd_bench(const BenchArgs& a) {
  auto protocol = wire::parse_protocol(a.protocol);
  auto variant = network::parse_variant(a.variant);
  require_heuristic_ack(protocol, variant, a.heuristic);
  if (a.d == 0 || a.layers == 0) throw ConfigError("--d and --layers must be positive");
  InsecureSeededRandom data_rng(a.seed);
  auto& rng = system_random();

  model_io::Model model;
  model.precision = a.precision;
  model.kappa = a.kappa;
  std::vector<double> input;
  for (std::size_t j = 0; j < a.d; ++j) input.push_back(uniform_real(data_rng));

  switch (protocol) {
    case ProtocolId::regr_core:
    case ProtocolId::regr_dual:
    case ProtocolId::svm_core:
    case ProtocolId::svm_heur: {
      bool svm = protocol == ProtocolId::svm_core || protocol == ProtocolId::svm_heur;
      model.type = svm ? model_io::ModelType::svm : model_io::ModelType::linear;
      model.activation = svm ? Activation::sign : Activation::identity;
      std::vector<double> w;
      for (std::size_t j = 0; j <= a.d; ++j) w.push_back(uniform_real(data_rng));
      model.linear = linear::LinearModel::from_real(w, a.precision);
      break;
    }
    case ProtocolId::ffnn_generic:
    case ProtocolId::ffnn_encrypted: {
      model.type = model_io::ModelType::ffnn;
      Activation g = protocol == ProtocolId::ffnn_generic ? Activation::sigmoid : parse_activation(a.activation);
      std::vector<network::NetworkSpec::RealLayer> layers;
      for (std::size_t l = 0; l < a.layers; ++l) {
        network::NetworkSpec::RealLayer layer;
        layer.activation = g;
        for (std::size_t u = 0; u < a.d; ++u) {
          std::vector<double> row;
          for (std::size_t j = 0; j <= a.d; ++j) row.push_back(uniform_real(data_rng));
          layer.weights.push_back(std::move(row));
        }
        layers.push_back(std::move(layer));
      }
      model.network = network::NetworkSpec::from_real(a.d, layers, a.precision,
                                                      protocol == ProtocolId::ffnn_generic);
      model.activation = g;
      break;
    }
    default:
      throw ConfigError("cannot benchmark " + std::string(wire::to_string(protocol)));
  }

  std::cerr << "generating two " << a.ell_m << "-bit key pairs\n";
  auto server_keys = paillier::generate_keypair(a.ell_m, rng);
  auto client_keys = paillier::generate_keypair(a.ell_m, rng);
  const std::size_t l_m = client_keys.pub.bit_length();

  Expected e;
  std::size_t ell = model.linear ? model.linear->ell() : 0;
  std::size_t publish_bits = 0;
  switch (protocol) {
    case ProtocolId::regr_core: add(e, bandwidth::regr_core(a.d), 1, l_m); break;
    case ProtocolId::regr_dual: add(e, bandwidth::regr_dual(), 1, l_m); break;
    case ProtocolId::svm_core: add(e, bandwidth::svm_core(ell), 1, l_m); break;
    case ProtocolId::svm_heur: add(e, bandwidth::svm_heuristic(a.d), 1, l_m); break;
    case ProtocolId::ffnn_generic: add(e, bandwidth::ffnn_generic_layer(a.d), a.layers, l_m); break;
    default: {
      const auto& net = *model.network;
      for (std::size_t l = 0; l < net.depth(); ++l) {
        std::size_t le = net.info(l).ell;
        bool relu = net.layer(l).activation == Activation::relu;
        auto est = variant == network::Variant::core
                       ? (relu ? bandwidth::relu_core_unit(le) : bandwidth::sign_core_unit(le))
                       : (relu ? bandwidth::relu_heuristic_unit() : bandwidth::sign_heuristic_unit());
        add(e, est, net.layer(l).units(), l_m);
      }
      // Encrypted inputs up, final outputs down.
      e.up += a.d;
      e.down += net.output_dim();
      break;
    }
  }
  if (protocol == ProtocolId::regr_dual || protocol == ProtocolId::svm_core) {
    publish_bits = bandwidth::publish(a.d).down.bits(l_m);
  }

  service::ServerOptions opts{{protocol}, variant};
  service::ModelServer server(model, std::move(server_keys), opts, rng);
  wire::Transcript publish_t;
  auto result = service::with_loopback(server, [&](channel::Channel& ch) {
    service::ModelClient client(ch, rng);
    auto info = client.describe();
    std::optional<linear::PublishedModel> published;
    if (protocol == ProtocolId::regr_dual || protocol == ProtocolId::svm_core) {
      published = client.publish(&publish_t);
    }
    return client.query(protocol, client_keys, info, input, published ? &*published : nullptr);
  });

  auto s = wire::transcript_stats(result.transcript);
  auto kb = [](double bytes) { return bytes / 1024.0; };
  std::printf("protocol %s  d=%zu  l_M=%zu  P=%zu  kappa=%zu", std::string(wire::to_string(protocol)).c_str(),
              a.d, l_m, a.precision, a.kappa);
  if (ell) std::printf("  ell=%zu", ell);
  if (model.network) std::printf("  layers=%zu", a.layers);
  std::printf("\n");
  std::printf("%-6s %12s %12s %14s %12s %14s\n", "flow", "ciphertexts", "closed-form", "bytes", "kB",
              "closed-form kB");
  std::printf("%-6s %12zu %12zu %14zu %12.2f %14.2f\n", "up", s.ciphertexts_up, e.up, s.bytes_up,
              kb(s.bytes_up), bandwidth::kilobytes(e.bits_up));
  std::printf("%-6s %12zu %12zu %14zu %12.2f %14.2f\n", "down", s.ciphertexts_down, e.down, s.bytes_down,
              kb(s.bytes_down), bandwidth::kilobytes(e.bits_down));
  if (publish_bits) {
    auto ps = wire::transcript_stats(publish_t);
    std::printf("%-6s %12zu %12zu %14zu %12.2f %14.2f\n", "publ.", ps.ciphertexts_down, a.d + 1,
                ps.bytes_down, kb(ps.bytes_down), bandwidth::kilobytes(publish_bits));
  }
  std::printf("round trips %zu\n", s.round_trips);
  if (model.network) {
    std::printf("per layer: up %.2f kB, down %.2f kB\n", kb(s.bytes_up) / a.layers, kb(s.bytes_down) / a.layers);
  }

  if (s.ciphertexts_up != e.up || s.ciphertexts_down != e.down) {
    std::fprintf(stderr, "ciphertext counts diverge from the closed form\n");
    return kExitMismatch;
  }
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ProtocolViolation*>(&e) || dynamic_cast<const KeyMismatch*>(&e) ||
      dynamic_cast<const DecryptionError*>(&e)) {
    return kExitProtocol;
  }
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DimensionMismatch*>(&e) ||
      dynamic_cast<const RangeError*>(&e)) {
    return kExitConfig;
  }
  return kExitOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privml: private inference for linear models and feed-forward networks"};
  app.require_subcommand(1);

  KeygenArgs kg;
  auto* keygen = app.add_subcommand("keygen", "generate a Paillier key pair");
  keygen->add_option("--bits", kg.bits, "modulus size (2048, 3072; others need --insecure-test-keys)");
  keygen->add_option("--out", kg.out, "output base name (writes <out>.pub and <out>.sec)")->required();
  keygen->add_option("--kappa", kg.kappa, "statistical security parameter");
  keygen->add_option("--ell", kg.ell, "check an inner-product bit length against the key");
  keygen->add_flag("--insecure-test-keys", kg.insecure, "allow key sizes below 2048 bits");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "host a model");
  serve->add_option("--model", sv.model, "model file")->required();
  serve->add_option("--keys", sv.keys, "server key pair (base name or .sec file)")->required();
  serve->add_option("--listen", sv.listen, "host:port (port 0 picks a free port)");
  serve->add_option("--protocol", sv.protocols, "protocol(s) to serve")->required();
  serve->add_option("--variant", sv.variant, "ffnn-encrypted variant: core or heuristic");
  serve->add_flag("--heuristic", sv.heuristic, "accept the leakage of heuristic protocols");
  serve->add_flag("--insecure-test-keys", sv.insecure, "accept keys below 2048 bits");
  serve->add_option("--connections", sv.connections, "exit after this many connections (0: never)");

  InferArgs in;
  auto* infer = app.add_subcommand("infer", "run a private inference");
  infer->add_option("--server", in.server, "host:port of a running server");
  infer->add_flag("--loopback", in.loopback, "run the server in-process on --model");
  infer->add_option("--model", in.model, "model file for --loopback");
  infer->add_option("--server-keys", in.server_keys, "server key pair for --loopback");
  infer->add_option("--input", in.input, "feature file, one value per line")->required();
  infer->add_option("--protocol", in.protocol, "protocol")->required();
  infer->add_option("--keys", in.keys, "client key pair (default: fresh keys)");
  infer->add_option("--key-bits", in.key_bits, "size of fresh client keys");
  infer->add_option("--verify", in.verify, "plaintext model file to check the result against");
  infer->add_option("--variant", in.variant, "ffnn-encrypted variant for --loopback");
  infer->add_flag("--allow-unscaled", in.allow_unscaled, "accept inputs outside [-1, 1]");
  infer->add_flag("--heuristic", in.heuristic, "accept the leakage of heuristic protocols");
  infer->add_flag("--insecure-test-keys", in.insecure, "accept keys below 2048 bits");
  infer->add_flag("--stats", in.stats, "print transcript sizes");

  OracleArgs or_;
  auto* oracle = app.add_subcommand("oracle", "evaluate a model in plaintext");
  oracle->add_option("--model", or_.model, "model file")->required();
  oracle->add_option("--input", or_.input, "feature file")->required();
  oracle->add_flag("--allow-unscaled", or_.allow_unscaled, "accept inputs outside [-1, 1]");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "measure message sizes against the closed forms");
  bench->add_option("--protocol", bn.protocol, "protocol")->required();
  bench->add_option("--d", bn.d, "feature count (and layer width)");
  bench->add_option("--ell-m", bn.ell_m, "key size in bits");
  bench->add_option("--layers", bn.layers, "network depth");
  bench->add_option("--precision", bn.precision, "fixed-point precision P");
  bench->add_option("--kappa", bn.kappa, "statistical security parameter");
  bench->add_option("--activation", bn.activation, "ffnn-encrypted activation: sign or relu");
  bench->add_option("--variant", bn.variant, "ffnn-encrypted variant: core or heuristic");
  bench->add_option("--seed", bn.seed, "seed of the synthetic model and input");
  bench->add_flag("--heuristic", bn.heuristic, "accept the leakage of heuristic protocols");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*keygen) return cmd_keygen(kg);
    if (*serve) return cmd_serve(sv);
    if (*infer) return cmd_infer(in);
    if (*oracle) return cmd_oracle(or_);
    if (*bench) return cmd_bench(bn);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOther;
}

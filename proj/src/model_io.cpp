#include "privml/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "privml/bytes.hpp"
#include "privml/errors.hpp"
#include "privml/fixedpoint.hpp"
#include "privml/masking.hpp"

namespace privml::model_io {

using json = nlohmann::json;

namespace {

constexpr std::uint8_t kKeyMagic[4] = {'P', 'P', 'K', 'Y'};
constexpr std::uint8_t kKeyVersion = 1;
constexpr std::uint8_t kPublicKind = 1;
constexpr std::uint8_t kSecretKind = 2;

BigInt weight_from_json(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return parse_decimal(v.get<std::string>());
    } catch (const DecodeError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (v.is_number_integer()) return BigInt(std::to_string(v.get<long long>()));
  throw ConfigError(where + ": weights must be decimal strings");
}

double real_from_json(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where + ": weight is not finite");
  return d;
}

std::size_t size_field(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

Activation activation_field(const json& j, const char* key, Activation fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
  return parse_activation(j.at(key).get<std::string>());
}

Model parse_linear(const json& j, Model m) {
  Activation fallback = m.type == ModelType::logistic ? Activation::sigmoid
                        : m.type == ModelType::svm    ? Activation::sign
                                                      : Activation::identity;
  m.activation = activation_field(j, "activation", fallback);
  if (m.type == ModelType::logistic && m.activation != Activation::sigmoid) {
    throw ConfigError("logistic models use the sigmoid activation");
  }
  if (m.type == ModelType::svm && m.activation != Activation::sign) {
    throw ConfigError("svm models use the sign activation");
  }
  if (m.type == ModelType::linear && !is_injective(m.activation)) {
    throw ConfigError("linear models need an injective activation");
  }
  std::optional<std::size_t> ell;
  if (j.contains("ell")) ell = size_field(j, "ell", 0);

  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    if (!w.is_array() || w.empty()) throw ConfigError("'weights' must be a non-empty array");
    std::vector<BigInt> theta;
    for (std::size_t i = 0; i < w.size(); ++i) {
      theta.push_back(weight_from_json(w[i], "weights[" + std::to_string(i) + "]"));
    }
    m.linear.emplace(std::move(theta), m.precision, ell);
  } else if (j.contains("real_weights")) {
    const auto& w = j.at("real_weights");
    if (!w.is_array() || w.empty()) throw ConfigError("'real_weights' must be a non-empty array");
    std::vector<double> reals;
    for (std::size_t i = 0; i < w.size(); ++i) {
      reals.push_back(real_from_json(w[i], "real_weights[" + std::to_string(i) + "]"));
    }
    m.linear = linear::LinearModel::from_real(reals, m.precision, ell);
  } else {
    throw ConfigError("model has neither 'weights' nor 'real_weights'");
  }
  return m;
}

Model parse_ffnn(const json& j, Model m) {
  std::size_t input_dim = size_field(j, "input_dim", 0);
  if (input_dim == 0) throw ConfigError("ffnn models need a positive 'input_dim'");
  bool reveal = j.value("reveal_output", true);
  if (!j.contains("layers") || !j.at("layers").is_array() || j.at("layers").empty()) {
    throw ConfigError("ffnn models need a non-empty 'layers' array");
  }
  const auto& layers = j.at("layers");
  std::vector<std::size_t> ells;
  if (j.contains("ell")) {
    if (!j.at("ell").is_array()) throw ConfigError("ffnn 'ell' must be a per-layer array");
    for (const auto& e : j.at("ell")) {
      if (!e.is_number_unsigned()) throw ConfigError("ffnn 'ell' entries must be non-negative integers");
      ells.push_back(e.get<std::size_t>());
    }
  }

  bool real = layers.at(0).contains("real_weights");
  if (real) {
    std::vector<network::NetworkSpec::RealLayer> rl;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      std::string where = "layers[" + std::to_string(l) + "]";
      if (!L.contains("real_weights")) throw ConfigError(where + ": mixes weight encodings");
      network::NetworkSpec::RealLayer layer;
      layer.activation = activation_field(L, "activation", Activation::identity);
      for (std::size_t r = 0; r < L.at("real_weights").size(); ++r) {
        std::vector<double> row;
        const auto& R = L.at("real_weights")[r];
        if (!R.is_array()) throw ConfigError(where + ": rows must be arrays");
        for (std::size_t c = 0; c < R.size(); ++c) {
          row.push_back(real_from_json(R[c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
        }
        layer.weights.push_back(std::move(row));
      }
      rl.push_back(std::move(layer));
    }
    if (!ells.empty()) throw ConfigError("declared ell requires integer weights");
    m.network = network::NetworkSpec::from_real(input_dim, rl, m.precision, reveal);
  } else {
    std::vector<network::Layer> out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      std::string where = "layers[" + std::to_string(l) + "]";
      if (!L.contains("weights") || !L.at("weights").is_array()) {
        throw ConfigError(where + ": missing 'weights'");
      }
      network::Layer layer;
      layer.activation = activation_field(L, "activation", Activation::identity);
      for (std::size_t r = 0; r < L.at("weights").size(); ++r) {
        const auto& R = L.at("weights")[r];
        if (!R.is_array()) throw ConfigError(where + ": rows must be arrays");
        std::vector<BigInt> row;
        for (std::size_t c = 0; c < R.size(); ++c) {
          row.push_back(weight_from_json(R[c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
        }
        layer.weights.push_back(std::move(row));
      }
      out.push_back(std::move(layer));
    }
    m.network.emplace(input_dim, std::move(out), m.precision, ells, reveal);
  }
  m.activation = m.network->layer(m.network->depth() - 1).activation;
  return m;
}

std::vector<std::uint8_t> to_vec(const std::string& s) { return {s.begin(), s.end()}; }

std::string strip_key_suffix(const std::string& path) {
  for (const char* ext : {".pub", ".sec"}) {
    std::string e(ext);
    if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0) {
      return path.substr(0, path.size() - e.size());
    }
  }
  return path;
}

std::vector<std::uint8_t> read_key_body(const std::string& path, std::uint8_t kind) {
  auto data = to_vec(read_file(path));
  ByteReader r(data);
  try {
    auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kKeyMagic)) throw DecodeError("bad magic");
    if (r.u8() != kKeyVersion) throw DecodeError("unsupported key file version");
    if (r.u8() != kind) throw DecodeError(kind == kPublicKind ? "not a public key file" : "not a secret key file");
    auto body = r.prefixed();
    r.expect_done("key file");
    return {body.begin(), body.end()};
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

void write_key(const std::string& path, std::uint8_t kind, const std::vector<std::uint8_t>& body) {
  ByteWriter w;
  w.raw(kKeyMagic);
  w.u8(kKeyVersion);
  w.u8(kind);
  w.prefixed(body);
  auto bytes = w.take();
  write_file(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace

std::string_view to_string(ModelType t) {
  switch (t) {
    case ModelType::linear: return "linear";
    case ModelType::logistic: return "logistic";
    case ModelType::svm: return "svm";
    case ModelType::ffnn: return "ffnn";
  }
  return "unknown";
}

ModelType parse_model_type(std::string_view name) {
  for (auto t : {ModelType::linear, ModelType::logistic, ModelType::svm, ModelType::ffnn}) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown model type '" + std::string(name) + "'");
}

std::size_t Model::input_dim() const {
  return network ? network->input_dim() : linear->dimension();
}

Model parse_model(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model file must be a JSON object");
  try {
    int version = j.value("format_version", 0);
    if (version != kModelFormatVersion) {
      throw ConfigError("unsupported model format_version " + std::to_string(version));
    }
    if (!j.contains("model_type") || !j.at("model_type").is_string()) {
      throw ConfigError("model file lacks 'model_type'");
    }
    Model m;
    m.type = parse_model_type(j.at("model_type").get<std::string>());
    m.precision = size_field(j, "precision", fixedpoint::kDefaultPrecision);
    m.kappa = size_field(j, "kappa", masking::kDefaultKappa);
    return m.type == ModelType::ffnn ? parse_ffnn(j, std::move(m)) : parse_linear(j, std::move(m));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

Model load_model(const std::string& path) {
  try {
    return parse_model(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string model_to_json(const Model& m) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["model_type"] = std::string(to_string(m.type));
  j["precision"] = m.precision;
  j["kappa"] = m.kappa;
  if (m.network) {
    const auto& net = *m.network;
    j["input_dim"] = net.input_dim();
    j["reveal_output"] = net.reveal_output();
    json layers = json::array();
    json ells = json::array();
    for (std::size_t l = 0; l < net.depth(); ++l) {
      json L;
      L["activation"] = std::string(privml::to_string(net.layer(l).activation));
      json rows = json::array();
      for (const auto& row : net.layer(l).weights) {
        json r = json::array();
        for (const auto& w : row) r.push_back(to_decimal(w));
        rows.push_back(r);
      }
      L["weights"] = rows;
      layers.push_back(L);
      ells.push_back(net.info(l).ell);
    }
    j["layers"] = layers;
    j["ell"] = ells;
  } else {
    j["activation"] = std::string(privml::to_string(m.activation));
    j["ell"] = m.linear->ell();
    json w = json::array();
    for (const auto& t : m.linear->theta()) w.push_back(to_decimal(t));
    j["weights"] = w;
  }
  return j.dump(2) + "\n";
}

void save_model(const Model& model, const std::string& path) { write_file(path, model_to_json(model)); }

void write_keypair(const std::string& base, const paillier::Keypair& keys) {
  write_key(base + ".pub", kPublicKind, paillier::serialize_public_key(keys.pub));
  write_key(base + ".sec", kSecretKind, paillier::serialize_secret_key(keys.sec));
}

paillier::PublicKey read_public_key(const std::string& path) {
  return paillier::parse_public_key(read_key_body(path, kPublicKind));
}

paillier::SecretKey read_secret_key(const std::string& path) {
  return paillier::parse_secret_key(read_key_body(path, kSecretKind));
}

paillier::Keypair read_keypair(const std::string& path) {
  std::string base = strip_key_suffix(path);
  auto sec = read_secret_key(base + ".sec");
  return paillier::Keypair{sec.public_key(), sec};
}

std::vector<double> parse_input(const std::string& text, bool allow_unscaled) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string token = line.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) {
      throw DecodeError("line " + std::to_string(lineno) + ": '" + token + "' is not a finite number");
    }
    if (!allow_unscaled && (v < -1.0 || v > 1.0)) {
      throw DecodeError("line " + std::to_string(lineno) + ": " + token +
                        " lies outside [-1, 1] (pass --allow-unscaled to accept it)");
    }
    out.push_back(v);
  }
  if (out.empty()) throw DecodeError("input contains no values");
  return out;
}

std::vector<double> read_input(const std::string& path, bool allow_unscaled) {
  try {
    return parse_input(read_file(path), allow_unscaled);
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << data;
  if (!out.flush()) throw ConfigError("cannot write '" + path + "'");
}

}  // namespace privml::model_io

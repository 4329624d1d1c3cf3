#include "privml/network.hpp"

#include <algorithm>

#include "privml/errors.hpp"
#include "privml/fixedpoint.hpp"
#include "privml/masking.hpp"

namespace privml::network {

namespace {

std::size_t ceil_log2(std::size_t n) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return bits;
}

BigInt abs_value(const BigInt& v) { return v < 0 ? BigInt(-v) : v; }

}  // namespace

std::string_view to_string(Mode m) { return m == Mode::generic ? "generic" : "encrypted"; }
std::string_view to_string(Variant v) { return v == Variant::core ? "core" : "heuristic"; }

Mode parse_mode(std::string_view name) {
  if (name == "generic") return Mode::generic;
  if (name == "encrypted") return Mode::encrypted;
  throw ConfigError("unknown network mode '" + std::string(name) + "'");
}

Variant parse_variant(std::string_view name) {
  if (name == "core") return Variant::core;
  if (name == "heuristic") return Variant::heuristic;
  throw ConfigError("unknown protocol variant '" + std::string(name) + "'");
}

std::size_t activation_scale(Activation g, std::size_t pre_scale, std::size_t precision) {
  if (g == Activation::sign) return 0;
  if (g == Activation::relu || g == Activation::identity) return pre_scale;
  return precision;
}

BigInt activate_fixed(Activation g, const BigInt& t, std::size_t pre_scale, std::size_t precision) {
  switch (g) {
    case Activation::sign:
      return sign_nonneg(t);
    case Activation::relu:
      return t < 0 ? BigInt(0) : t;
    case Activation::identity:
      return t;
    default:
      return fixedpoint::encode(apply_activation(g, fixedpoint::decode(t, pre_scale)), precision);
  }
}

std::size_t NetworkSpec::default_ell(std::size_t input_bits, std::size_t precision,
                                     std::size_t fan_in) {
  return precision + input_bits + ceil_log2(fan_in + 1);
}

NetworkSpec::NetworkSpec(std::size_t input_dim, std::vector<Layer> layers, std::size_t precision,
                         std::vector<std::size_t> declared_ell, bool reveal_output)
    : input_dim_(input_dim),
      layers_(std::move(layers)),
      precision_(precision),
      reveal_output_(reveal_output) {
  if (input_dim_ == 0) throw ConfigError("network needs at least one input");
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
  if (!declared_ell.empty() && declared_ell.size() != layers_.size()) {
    throw ConfigError("per-layer ell list has " + std::to_string(declared_ell.size()) +
                      " entries for " + std::to_string(layers_.size()) + " layers");
  }

  std::size_t fan_in = input_dim_;
  std::size_t scale = precision_;
  // Bound on |x_j^(l-1)| and its bit length.
  BigInt in_bound = pow2(precision_);
  std::size_t in_bits = precision_;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const std::string where = "layer " + std::to_string(l + 1);
    if (layer.units() == 0) throw ConfigError(where + " has no units");
    for (const auto& row : layer.weights) {
      if (row.size() != fan_in + 1) {
        throw ConfigError(where + " expects rows of " + std::to_string(fan_in + 1) +
                          " weights, got " + std::to_string(row.size()));
      }
    }

    BigInt need = 0;
    for (const auto& row : layer.weights) {
      BigInt b = abs_value(row[0]);
      for (std::size_t j = 1; j < row.size(); ++j) b += abs_value(row[j]) * in_bound;
      need = std::max(need, b);
    }
    std::size_t need_bits = bit_length(need);
    std::size_t ell;
    if (!declared_ell.empty()) {
      ell = declared_ell[l];
      if (ell < need_bits) {
        throw ConfigError(where + " declares ell = " + std::to_string(ell) + " but its weights need " +
                          std::to_string(need_bits) + " bits");
      }
    } else {
      ell = std::max(default_ell(in_bits, precision_, fan_in), need_bits);
    }

    LayerInfo info;
    info.input_scale = scale;
    info.pre_scale = precision_ + scale;
    info.output_scale = activation_scale(layer.activation, info.pre_scale, precision_);
    info.ell = ell;
    info_.push_back(info);

    switch (layer.activation) {
      case Activation::sign:
        in_bound = 1;
        in_bits = 0;
        break;
      case Activation::relu:
      case Activation::identity:
        in_bound = masking::bound_for_bits(ell);
        in_bits = ell;
        break;
      default:
        in_bound = pow2(precision_);
        in_bits = precision_;
        break;
    }
    scale = info.output_scale;
    fan_in = layer.units();
  }
}

NetworkSpec NetworkSpec::from_real(std::size_t input_dim, const std::vector<RealLayer>& layers,
                                   std::size_t precision, bool reveal_output) {
  std::vector<Layer> out;
  std::size_t scale = precision;
  for (const auto& rl : layers) {
    Layer layer;
    layer.activation = rl.activation;
    std::size_t pre = precision + scale;
    for (const auto& row : rl.weights) {
      if (row.empty()) throw ConfigError("weight row without a bias");
      std::vector<BigInt> r;
      r.push_back(fixedpoint::encode(row[0], pre));
      for (std::size_t j = 1; j < row.size(); ++j) r.push_back(fixedpoint::encode(row[j], precision));
      layer.weights.push_back(std::move(r));
    }
    scale = activation_scale(rl.activation, pre, precision);
    out.push_back(std::move(layer));
  }
  return NetworkSpec(input_dim, std::move(out), precision, {}, reveal_output);
}

bool NetworkSpec::protocol_layer(std::size_t l) const {
  return l + 1 < layers_.size() || !reveal_output_;
}

void NetworkSpec::require_encrypted_activations() const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (!protocol_layer(l)) continue;
    Activation g = layers_[l].activation;
    if (g != Activation::sign && g != Activation::relu) {
      throw ConfigError("encrypted mode supports only sign and relu activations; layer " +
                        std::to_string(l + 1) + " uses " + std::string(privml::to_string(g)));
    }
  }
}

void NetworkSpec::require_encrypted_capacity(const BigInt& modulus, std::size_t kappa,
                                             Variant v) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (!protocol_layer(l)) continue;
    std::size_t ell = info_[l].ell;
    if (v == Variant::core) {
      masking::require_core_capacity(modulus, ell, kappa);
    } else {
      auto interval = masking::heuristic_interval(modulus, masking::bound_for_bits(ell));
      masking::require_heuristic_capacity(interval, kappa);
    }
  }
}

}  // namespace privml::network

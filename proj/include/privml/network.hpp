#pragma once

#include <cstddef>
#include <vector>

#include "privml/activation.hpp"
#include "privml/bigint.hpp"

/// Feed-forward network description with explicit fixed-point bookkeeping.
///
/// Layer l maps x^(l-1) (with the constant x_0 = 1) to x^(l) through
/// x_j^(l) = g(theta_j^T x^(l-1)). Weights carry scale 2^P and biases the
/// pre-activation scale, so the pre-activation scale of layer l is
/// P + s_(l-1). sign resets the scale to 0, relu and identity keep it, and
/// the smooth activations re-encode their output at P.
namespace privml::network {

enum class Mode { generic, encrypted };
enum class Variant { core, heuristic };

std::string_view to_string(Mode m);
std::string_view to_string(Variant v);
Mode parse_mode(std::string_view name);
Variant parse_variant(std::string_view name);

struct Layer {
  /// d_l rows of d_(l-1) + 1 weights, bias first.
  std::vector<std::vector<BigInt>> weights;
  Activation activation = Activation::identity;

  std::size_t units() const { return weights.size(); }
  std::size_t inputs() const { return weights.empty() ? 0 : weights.front().size() - 1; }
};

/// Derived per-layer data.
struct LayerInfo {
  std::size_t input_scale = 0;
  std::size_t pre_scale = 0;
  std::size_t output_scale = 0;
  /// Bit length of the bound on every pre-activation of the layer.
  std::size_t ell = 0;
};

/// Output scale after applying `g` to values at `pre_scale`.
std::size_t activation_scale(Activation g, std::size_t pre_scale, std::size_t precision);

/// Fixed-point activation: the integer the next layer receives.
BigInt activate_fixed(Activation g, const BigInt& t, std::size_t pre_scale, std::size_t precision);

class NetworkSpec {
 public:
  /// Throws ConfigError when dimensions do not chain or a declared ell is
  /// below what the weights need for inputs bounded by 2^P.
  NetworkSpec(std::size_t input_dim, std::vector<Layer> layers, std::size_t precision,
              std::vector<std::size_t> declared_ell = {}, bool reveal_output = true);

  /// Real weights per layer (rows bias first). Weights are encoded at P and
  /// biases at the layer's pre-activation scale.
  struct RealLayer {
    std::vector<std::vector<double>> weights;
    Activation activation = Activation::identity;
  };
  static NetworkSpec from_real(std::size_t input_dim, const std::vector<RealLayer>& layers,
                               std::size_t precision, bool reveal_output = true);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return layers_.back().units(); }
  std::size_t depth() const { return layers_.size(); }
  std::size_t precision() const { return precision_; }
  bool reveal_output() const { return reveal_output_; }
  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(std::size_t l) const { return layers_.at(l); }
  const LayerInfo& info(std::size_t l) const { return info_.at(l); }

  /// Whether the layer is evaluated by an interactive sign/relu protocol in
  /// encrypted mode (every hidden layer, and the output layer unless its
  /// inner products are revealed).
  bool protocol_layer(std::size_t l) const;

  /// Throws ConfigError unless every protocol layer uses sign or relu.
  void require_encrypted_activations() const;
  /// Throws ConfigError unless the client modulus leaves room for the masks
  /// of every protocol layer.
  void require_encrypted_capacity(const BigInt& modulus, std::size_t kappa, Variant v) const;

  /// (l+1)P + sum_k<=l ceil(log2(d_(k-1) + 1)) style default for layer l,
  /// generalized to any activation chain.
  static std::size_t default_ell(std::size_t input_bits, std::size_t precision,
                                 std::size_t fan_in);

 private:
  std::size_t input_dim_;
  std::vector<Layer> layers_;
  std::size_t precision_;
  bool reveal_output_;
  std::vector<LayerInfo> info_;
};

}  // namespace privml::network

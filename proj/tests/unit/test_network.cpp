#include <cmath>

#include <doctest.h>

#include "privml/errors.hpp"
#include "privml/network.hpp"
#include "privml/reference.hpp"

using namespace privml;
using namespace privml::network;

namespace {

Layer int_layer(std::vector<std::vector<long>> rows, Activation g) {
  Layer layer;
  layer.activation = g;
  for (const auto& r : rows) {
    std::vector<BigInt> row;
    for (long v : r) row.emplace_back(v);
    layer.weights.push_back(std::move(row));
  }
  return layer;
}

}  // namespace

TEST_CASE("activation scales") {
  CHECK(activation_scale(Activation::sign, 20, 10) == 0);
  CHECK(activation_scale(Activation::relu, 20, 10) == 20);
  CHECK(activation_scale(Activation::identity, 20, 10) == 20);
  CHECK(activation_scale(Activation::sigmoid, 20, 10) == 10);
  CHECK(activation_scale(Activation::tanh, 20, 10) == 10);
}

TEST_CASE("fixed-point activations") {
  CHECK(activate_fixed(Activation::sign, BigInt(-5), 20, 10) == -1);
  CHECK(activate_fixed(Activation::sign, BigInt(0), 20, 10) == 1);
  CHECK(activate_fixed(Activation::relu, BigInt(-5), 20, 10) == 0);
  CHECK(activate_fixed(Activation::relu, BigInt(7), 20, 10) == 7);
  CHECK(activate_fixed(Activation::identity, BigInt(-7), 20, 10) == -7);
  // sigmoid(0) = 1/2 at scale 2^10.
  CHECK(activate_fixed(Activation::sigmoid, BigInt(0), 20, 10) == 512);
}

TEST_CASE("scales and bit lengths chain through the layers") {
  const std::size_t P = 4;
  std::vector<Layer> layers{
      int_layer({{1, 2, 3}, {0, -1, 1}}, Activation::relu),
      int_layer({{5, 1, 1}}, Activation::sign),
      int_layer({{2, 3}}, Activation::identity),
  };
  NetworkSpec spec(2, layers, P);
  CHECK(spec.depth() == 3);
  CHECK(spec.output_dim() == 1);
  CHECK(spec.info(0).input_scale == 4);
  CHECK(spec.info(0).pre_scale == 8);
  CHECK(spec.info(0).output_scale == 8);
  CHECK(spec.info(1).pre_scale == 12);
  CHECK(spec.info(1).output_scale == 0);
  CHECK(spec.info(2).pre_scale == 4);
  // Layer 1: P + P + ceil(log2 3) = 10.
  CHECK(spec.info(0).ell == 10);
  // Layer 2 inputs are bounded by 2^10 - 1: P + 10 + ceil(log2 3) = 16.
  CHECK(spec.info(1).ell == 16);
  // Layer 3 follows a sign layer: P + 0 + ceil(log2 2) = 5.
  CHECK(spec.info(2).ell == 5);
  CHECK(spec.protocol_layer(0));
  CHECK(spec.protocol_layer(1));
  CHECK_FALSE(spec.protocol_layer(2));
  CHECK_NOTHROW(spec.require_encrypted_activations());
  CHECK(NetworkSpec::default_ell(4, 4, 2) == 10);
}

TEST_CASE("invalid networks are rejected") {
  CHECK_THROWS_AS(NetworkSpec(2, {int_layer({{1, 2}}, Activation::sign)}, 4), ConfigError);
  CHECK_THROWS_AS(NetworkSpec(2, {}, 4), ConfigError);
  CHECK_THROWS_AS(NetworkSpec(2, {int_layer({{1, 2, 3}}, Activation::sign)}, 4, {2}), ConfigError);
  NetworkSpec smooth(2, {int_layer({{1, 2, 3}}, Activation::sigmoid), int_layer({{1, 1}}, Activation::identity)}, 4);
  CHECK_THROWS_AS(smooth.require_encrypted_activations(), ConfigError);
  NetworkSpec hidden_out(2, {int_layer({{1, 2, 3}}, Activation::identity)}, 4, {}, false);
  CHECK(hidden_out.protocol_layer(0));
  CHECK_THROWS_AS(hidden_out.require_encrypted_activations(), ConfigError);
}

TEST_CASE("capacity check uses every protocol layer") {
  NetworkSpec spec(2, {int_layer({{1, 2, 3}}, Activation::sign), int_layer({{1, 1}}, Activation::sign)}, 4);
  CHECK_NOTHROW(spec.require_encrypted_capacity(BigInt(1) << 200, 40, Variant::core));
  CHECK_THROWS_AS(spec.require_encrypted_capacity(BigInt(1) << 40, 40, Variant::core), ConfigError);
}

TEST_CASE("names round trip") {
  CHECK(parse_mode(to_string(Mode::generic)) == Mode::generic);
  CHECK(parse_variant(to_string(Variant::heuristic)) == Variant::heuristic);
  CHECK_THROWS_AS(parse_variant("fast"), ConfigError);
}

TEST_CASE("oracle forward pass by hand") {
  const std::size_t P = 2;
  // Inputs (1, -2) at scale 4: x = (4, -8).
  NetworkSpec spec(2, {int_layer({{-16, 1, 1}, {16, 1, 0}}, Activation::relu),
                       int_layer({{0, 1, -1}}, Activation::sign)}, P);
  auto x = linear::FeatureVector::from_features({BigInt(4), BigInt(-8)});
  auto pre = reference::ffnn_preactivations(spec, x);
  // Layer 1 at scale 16: -16 + 4 - 8 = -20, 16 + 4 = 20.
  CHECK(pre[0] == std::vector<BigInt>{-20, 20});
  // Layer 2: 0*1 + 1*0 - 1*20 = -20.
  CHECK(pre[1] == std::vector<BigInt>{-20});
  auto out = reference::eval_ffnn(spec, x);
  REQUIRE(out.size() == 1);
  CHECK(out[0].raw == -1);
  CHECK(*out[0].class_label == -1);
}

TEST_CASE("from_real encodes biases at the pre-activation scale") {
  NetworkSpec::RealLayer l1{{{0.5, 1.0}}, Activation::relu};
  NetworkSpec::RealLayer l2{{{0.25, 1.0}}, Activation::identity};
  auto spec = NetworkSpec::from_real(1, {l1, l2}, 3);
  CHECK(spec.layer(0).weights[0] == std::vector<BigInt>{32, 8});
  CHECK(spec.layer(1).weights[0] == std::vector<BigInt>{128, 8});
}

#include "privml/reference.hpp"

#include "privml/errors.hpp"
#include "privml/fixedpoint.hpp"

namespace privml::reference {

BigInt inner_product(std::span<const BigInt> theta, std::span<const BigInt> x) {
  if (theta.size() != x.size()) {
    throw DimensionMismatch("inner product of " + std::to_string(theta.size()) + " weights with " +
                            std::to_string(x.size()) + " inputs");
  }
  BigInt acc = 0;
  for (std::size_t j = 0; j < theta.size(); ++j) acc += theta[j] * x[j];
  return acc;
}

Prediction eval_linear(const linear::LinearModel& model, const linear::FeatureVector& x,
                       Activation g) {
  Prediction p;
  p.raw = inner_product(model.theta(), x.values());
  p.value = apply_activation(g, fixedpoint::decode(p.raw, 2 * model.precision()));
  if (g == Activation::sign) p.class_label = sign_nonneg(p.raw);
  return p;
}

Prediction eval_logistic(const linear::LinearModel& model, const linear::FeatureVector& x) {
  return eval_linear(model, x, Activation::sigmoid);
}

Prediction eval_svm(const linear::LinearModel& model, const linear::FeatureVector& x) {
  return eval_linear(model, x, Activation::sign);
}

namespace {

// Runs the network, calling `on_layer(l, pre)` with each layer's
// pre-activations, and returns the activated outputs of the last layer.
template <typename F>
std::vector<BigInt> forward(const network::NetworkSpec& spec, const linear::FeatureVector& x,
                            F&& on_layer) {
  if (x.dimension() != spec.input_dim()) {
    throw DimensionMismatch("network expects " + std::to_string(spec.input_dim()) +
                            " inputs, got " + std::to_string(x.dimension()));
  }
  std::vector<BigInt> cur = x.values();
  std::vector<BigInt> out;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    const auto& layer = spec.layer(l);
    const auto& info = spec.info(l);
    std::vector<BigInt> pre;
    pre.reserve(layer.units());
    for (const auto& row : layer.weights) pre.push_back(inner_product(row, cur));
    on_layer(l, pre);
    out.clear();
    for (const auto& t : pre) {
      out.push_back(network::activate_fixed(layer.activation, t, info.pre_scale, spec.precision()));
    }
    cur.assign(1, BigInt(1));
    cur.insert(cur.end(), out.begin(), out.end());
  }
  return out;
}

}  // namespace

std::vector<Prediction> eval_ffnn(const network::NetworkSpec& spec, const linear::FeatureVector& x) {
  std::vector<BigInt> last_pre;
  auto outputs = forward(spec, x, [&](std::size_t l, const std::vector<BigInt>& pre) {
    if (l + 1 == spec.depth()) last_pre = pre;
  });
  const auto& last = spec.layer(spec.depth() - 1);
  const auto& info = spec.info(spec.depth() - 1);
  std::vector<Prediction> result;
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    Prediction p;
    p.raw = outputs[j];
    p.value = apply_activation(last.activation, fixedpoint::decode(last_pre[j], info.pre_scale));
    if (last.activation == Activation::sign) p.class_label = sign_nonneg(last_pre[j]);
    result.push_back(std::move(p));
  }
  return result;
}

std::vector<std::vector<BigInt>> ffnn_preactivations(const network::NetworkSpec& spec,
                                                     const linear::FeatureVector& x) {
  std::vector<std::vector<BigInt>> all;
  forward(spec, x, [&](std::size_t, const std::vector<BigInt>& pre) { all.push_back(pre); });
  return all;
}

double eval_linear_real(std::span<const double> weights, std::span<const double> x) {
  if (weights.size() != x.size() + 1) {
    throw DimensionMismatch("real model has " + std::to_string(weights.size()) +
                            " weights for " + std::to_string(x.size()) + " features");
  }
  double acc = weights[0];
  for (std::size_t j = 0; j < x.size(); ++j) acc += weights[j + 1] * x[j];
  return acc;
}

}  // namespace privml::reference

#include "privml/activation.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "privml/errors.hpp"

namespace privml {

namespace {

constexpr std::array<std::pair<Activation, std::string_view>, 9> kNames{{
    {Activation::identity, "identity"},
    {Activation::sigmoid, "sigmoid"},
    {Activation::tanh, "tanh"},
    {Activation::arctan, "arctan"},
    {Activation::softsign, "softsign"},
    {Activation::softplus, "softplus"},
    {Activation::leaky_relu, "leaky_relu"},
    {Activation::sign, "sign"},
    {Activation::relu, "relu"},
}};

}  // namespace

std::string_view to_string(Activation a) {
  for (const auto& [act, name] : kNames) {
    if (act == a) return name;
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  for (const auto& [act, n] : kNames) {
    if (n == name) return act;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

bool is_injective(Activation a) {
  return a != Activation::sign && a != Activation::relu;
}

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

double logit(double y) { return std::log(y / (1.0 - y)); }

double apply_activation(Activation a, double t) {
  switch (a) {
    case Activation::identity: return t;
    case Activation::sigmoid: return sigmoid(t);
    case Activation::tanh: return std::tanh(t);
    case Activation::arctan: return std::atan(t);
    case Activation::softsign: return t / (1.0 + std::fabs(t));
    case Activation::softplus: return t > 30 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    case Activation::leaky_relu: return t < 0 ? 0.01 * t : t;
    case Activation::sign: return t >= 0 ? 1.0 : -1.0;
    case Activation::relu: return t > 0 ? t : 0.0;
  }
  return t;
}

int sign_nonneg(const BigInt& t) { return t >= 0 ? 1 : -1; }

}  // namespace privml

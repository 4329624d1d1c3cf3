#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "privml/bigint.hpp"

namespace privml {

enum class Activation {
  identity,
  sigmoid,
  tanh,
  arctan,
  softsign,
  softplus,
  leaky_relu,
  sign,
  relu,
};

std::string_view to_string(Activation a);
/// Throws ConfigError for unknown names.
Activation parse_activation(std::string_view name);

/// Injective activations can be applied by the client to the revealed
/// pre-activation without leaking more than the prediction itself.
bool is_injective(Activation a);

/// Real-valued activation. sign(0) = +1.
double apply_activation(Activation a, double t);

/// sign with the convention sign(0) = +1.
int sign_nonneg(const BigInt& t);

double sigmoid(double t);
/// ln(y / (1 - y)).
double logit(double y);

}  // namespace privml

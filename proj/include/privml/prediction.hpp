#pragma once

#include <optional>

#include "privml/bigint.hpp"

namespace privml {

/// Output of a model evaluation, private or plaintext.
struct Prediction {
  /// Exact fixed-point integer: the inner product for linear models, the
  /// activated output for network units. Protocols that only reveal a class
  /// leave it at zero.
  BigInt raw;
  /// Post-activation real value.
  double value = 0.0;
  /// +1 / -1, present iff the activation is sign.
  std::optional<int> class_label;
};

}  // namespace privml

#pragma once

#include <span>
#include <vector>

#include "privml/activation.hpp"
#include "privml/bigint.hpp"
#include "privml/linear.hpp"
#include "privml/network.hpp"
#include "privml/prediction.hpp"

/// Plaintext evaluation with the same fixed-point integers as the protocols,
/// so protocol outputs can be compared for exact equality.
namespace privml::reference {

/// theta^T x, where x includes x_0 = 1. Throws DimensionMismatch.
BigInt inner_product(std::span<const BigInt> theta, std::span<const BigInt> x);

/// g(theta^T x / 2^(2P)); raw is theta^T x.
Prediction eval_linear(const linear::LinearModel& model, const linear::FeatureVector& x,
                       Activation g = Activation::identity);
Prediction eval_logistic(const linear::LinearModel& model, const linear::FeatureVector& x);
/// Class sign(theta^T x) with sign(0) = +1.
Prediction eval_svm(const linear::LinearModel& model, const linear::FeatureVector& x);

/// Forward pass. Each output carries the activated fixed-point integer as
/// raw and g applied to the real pre-activation as value.
std::vector<Prediction> eval_ffnn(const network::NetworkSpec& spec, const linear::FeatureVector& x);

/// Pre-activations of every layer, for bound checks.
std::vector<std::vector<BigInt>> ffnn_preactivations(const network::NetworkSpec& spec,
                                                     const linear::FeatureVector& x);

/// Real-valued w^T (1, x) in double precision, for accuracy reporting only.
double eval_linear_real(std::span<const double> weights, std::span<const double> x);

}  // namespace privml::reference

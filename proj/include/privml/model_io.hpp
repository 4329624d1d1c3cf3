#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "privml/activation.hpp"
#include "privml/linear.hpp"
#include "privml/network.hpp"
#include "privml/paillier.hpp"

/// Model, key and input file formats.
namespace privml::model_io {

inline constexpr int kModelFormatVersion = 1;

enum class ModelType { linear, logistic, svm, ffnn };

std::string_view to_string(ModelType t);
ModelType parse_model_type(std::string_view name);

struct Model {
  ModelType type = ModelType::linear;
  std::size_t precision = 0;
  std::size_t kappa = 0;
  /// Output activation of linear models: identity (or another injective g)
  /// for linear, sigmoid for logistic, sign for svm.
  Activation activation = Activation::identity;
  std::optional<linear::LinearModel> linear;
  std::optional<network::NetworkSpec> network;

  std::size_t input_dim() const;
};

/// JSON model description. Weights are decimal strings (exact fixed-point
/// integers) under "weights", or reals under "real_weights". Throws
/// ConfigError with the offending field on any inconsistency.
Model parse_model(const std::string& json_text);
Model load_model(const std::string& path);
std::string model_to_json(const Model& model);
void save_model(const Model& model, const std::string& path);

/// Key files: "PPKY", version, kind (1 public, 2 secret), key bytes.
void write_keypair(const std::string& base, const paillier::Keypair& keys);
paillier::PublicKey read_public_key(const std::string& path);
paillier::SecretKey read_secret_key(const std::string& path);
/// Accepts the base name, or either file of the pair.
paillier::Keypair read_keypair(const std::string& path);

/// One decimal real per line; blank lines and '#' comments are skipped.
/// Throws DecodeError naming the line. Unless `allow_unscaled`, values must
/// lie in [-1, 1].
std::vector<double> parse_input(const std::string& text, bool allow_unscaled = false);
std::vector<double> read_input(const std::string& path, bool allow_unscaled = false);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

}  // namespace privml::model_io

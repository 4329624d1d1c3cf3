#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "privml/activation.hpp"
#include "privml/bigint.hpp"
#include "privml/comparison.hpp"
#include "privml/paillier.hpp"
#include "privml/prediction.hpp"
#include "privml/random.hpp"

/// Single round-trip private inference for linear models: regression (core
/// and dual), SVM classification with private comparison, and the heuristic
/// SVM protocol.
namespace privml::linear {

using paillier::Ciphertext;

/// Client feature vector (1, x_1, ..., x_d) as fixed-point integers.
class FeatureVector {
 public:
  /// `features` are x_1..x_d; the constant x_0 = 1 is prepended.
  static FeatureVector from_features(std::vector<BigInt> features);
  /// Encodes reals at `precision` bits.
  static FeatureVector encode(std::span<const double> features, std::size_t precision);

  const std::vector<BigInt>& values() const { return x_; }
  std::size_t dimension() const { return x_.size() - 1; }
  /// max_j>=1 |x_j|.
  BigInt max_abs_feature() const;

 private:
  std::vector<BigInt> x_;
};

/// theta = (theta_0, ..., theta_d) with theta_0 the bias. Weights carry scale
/// 2^P and the bias 2^(2P), so the inner product has scale 2^(2P).
class LinearModel {
 public:
  /// Throws ConfigError if an explicit ell is smaller than the weights need
  /// for features bounded by 2^P.
  LinearModel(std::vector<BigInt> theta, std::size_t precision,
              std::optional<std::size_t> ell = std::nullopt);

  /// Encodes real weights (bias first) at precision P, the bias at 2P.
  static LinearModel from_real(std::span<const double> weights, std::size_t precision,
                               std::optional<std::size_t> ell = std::nullopt);

  /// 2P + ceil(log2(d + 1)): the worst case for |theta_j|, |x_j| <= 2^P.
  static std::size_t default_ell(std::size_t precision, std::size_t dimension);
  /// |theta_0| + 2^P sum_j>=1 |theta_j|: bound on |theta^T x| for |x_j| <= 2^P.
  static BigInt weight_bound(std::span<const BigInt> theta, std::size_t precision);

  const std::vector<BigInt>& theta() const { return theta_; }
  std::size_t dimension() const { return theta_.size() - 1; }
  std::size_t ell() const { return ell_; }
  std::size_t precision() const { return precision_; }
  /// B = 2^ell - 1.
  BigInt bound() const;

 private:
  std::vector<BigInt> theta_;
  std::size_t precision_;
  std::size_t ell_;
};

/// Bit length needed for |theta^T x| when some feature exceeds 2^P:
/// ell + ceil(log2(ceil(max|x_j| / 2^P))).
std::size_t effective_ell(std::size_t model_ell, std::size_t precision, const FeatureVector& x);

/// Enc(theta_0) + sum_j theta_j * Enc(x_j), computed by the model owner.
Ciphertext encrypted_inner_product(const paillier::PublicKey& key, std::span<const BigInt> theta,
                                   std::span<const Ciphertext> features, RandomSource& rng);

// ---------------------------------------------------------------------------
// Client-key protocols: regression core and SVM heuristic share the request.

/// Client -> server: the client key and Enc(x_1..x_d) (x_0 is implicit).
struct EncryptedFeatures {
  paillier::PublicKey client_key;
  std::vector<Ciphertext> features;
  /// Bound bit length declared by the client for unscaled inputs; 0 means
  /// the model's own ell.
  std::size_t ell = 0;
};

EncryptedFeatures regr_core_request(const paillier::PublicKey& client_key, const FeatureVector& x,
                                    RandomSource& rng);

/// t = Enc(theta^T x). Throws DimensionMismatch.
Ciphertext regr_core_respond(const LinearModel& model, const EncryptedFeatures& request,
                             RandomSource& rng);

/// Decrypts t in the signed message set and applies the injective g to
/// t / 2^(2P). Throws ConfigError for non-injective activations.
Prediction regr_core_finish(const paillier::SecretKey& client_key, const Ciphertext& t,
                            Activation g, std::size_t precision);

// ---------------------------------------------------------------------------
// Server-key protocols: the model is published once under the server key.

struct PublishedModel {
  paillier::PublicKey server_key;
  /// Enc_S(theta_0), ..., Enc_S(theta_d).
  std::vector<Ciphertext> weights;
  std::size_t precision = 0;
  std::size_t ell = 0;
  std::size_t kappa = 0;

  std::size_t dimension() const { return weights.size() - 1; }
};

PublishedModel publish_model(const LinearModel& model, const paillier::PublicKey& server_key,
                             std::size_t kappa, RandomSource& rng);

/// Client-side state of a dual regression request. Single use.
class DualSession {
 public:
  explicit DualSession(BigInt mask, BigInt modulus, std::size_t precision)
      : mask_(std::move(mask)), modulus_(std::move(modulus)), precision_(precision) {}

  /// t = t* - mu in the signed message set, then g(t / 2^(2P)).
  /// Throws Error when called a second time.
  Prediction finish(const BigInt& t_star, Activation g);

  const BigInt& mask() const { return mask_; }

 private:
  BigInt mask_;
  BigInt modulus_;
  std::size_t precision_;
  bool consumed_ = false;
};

/// Enc_S(theta^T x + mu) with mu uniform over the message set.
std::pair<Ciphertext, DualSession> regr_dual_request(const PublishedModel& published,
                                                     const FeatureVector& x, RandomSource& rng);
/// Same with a caller-chosen mask. Test hook: a fixed mask reveals theta^T x.
std::pair<Ciphertext, DualSession> regr_dual_request_with_mask(const PublishedModel& published,
                                                               const FeatureVector& x,
                                                               const BigInt& mask,
                                                               RandomSource& rng);
/// Server decrypts t* (signed representative).
BigInt regr_dual_respond(const paillier::SecretKey& server_key, const Ciphertext& masked);

// ---------------------------------------------------------------------------
// SVM core: masked inner product under the server key, comparison bits under
// the client key.

struct SvmCoreRequest {
  Ciphertext masked;  // Enc_S(theta^T x + mu)
  paillier::PublicKey client_key;
  comparison::ComparisonRequest mask_bits;  // Enc_C(mu_0..mu_{ell-1})
};

class SvmCoreSession {
 public:
  SvmCoreSession(BigInt mask, std::size_t ell) : mask_(std::move(mask)), ell_(ell) {}

  /// delta_C from the comparison, then y = +1 iff delta_C XOR mu_ell.
  int finish(const paillier::SecretKey& client_key, const comparison::ComparisonResponse& response);

  const BigInt& mask() const { return mask_; }
  std::size_t ell() const { return ell_; }

 private:
  BigInt mask_;
  std::size_t ell_;
  bool consumed_ = false;
};

/// Throws ConfigError if the server modulus cannot hold t + mu without
/// wrapping for the effective ell and the published kappa.
std::pair<SvmCoreRequest, SvmCoreSession> svm_core_request(const PublishedModel& published,
                                                           const paillier::PublicKey& client_key,
                                                           const FeatureVector& x,
                                                           RandomSource& rng);
/// Variant with a caller-chosen mask in [2^ell - 1, 2^(ell+kappa)).
std::pair<SvmCoreRequest, SvmCoreSession> svm_core_request_with_mask(
    const PublishedModel& published, const paillier::PublicKey& client_key,
    const FeatureVector& x, const BigInt& mask, RandomSource& rng);

/// Decrypts t*, checks 0 <= t* <= (2^ell - 1) + (2^(ell+kappa) - 1), sets
/// eta = t* mod 2^ell and delta_S = bit ell of t*, and answers the
/// comparison. ProtocolViolation when t* is out of range.
comparison::ComparisonResponse svm_core_respond(const paillier::SecretKey& server_key,
                                                const SvmCoreRequest& request,
                                                std::size_t model_ell, std::size_t kappa,
                                                RandomSource& rng);

// ---------------------------------------------------------------------------
// SVM heuristic. Leaks log|theta^T x| to the client; see README.

/// Enc_C((-1)^delta_S (lambda theta^T x + mu)) with (lambda, mu) from the
/// heuristic interval. Throws ConfigError when the interval is too small for
/// kappa.
Ciphertext svm_heur_respond(const LinearModel& model, const EncryptedFeatures& request,
                            std::size_t kappa, RandomSource& rng);
/// sign(t*) with sign(0) = +1.
int svm_heur_finish(const paillier::SecretKey& client_key, const Ciphertext& t_star);

}  // namespace privml::linear

#include "privml/linear.hpp"

#include "privml/errors.hpp"
#include "privml/fixedpoint.hpp"
#include "privml/masking.hpp"

namespace privml::linear {

namespace {

std::size_t ceil_log2(std::size_t n) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return bits;
}

BigInt abs_value(const BigInt& v) { return v < 0 ? BigInt(-v) : v; }

void require_dimension(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(expected) +
                            " features, got " + std::to_string(got));
  }
}

Prediction finish_injective(const BigInt& t, Activation g, std::size_t precision) {
  if (!is_injective(g)) {
    throw ConfigError("activation '" + std::string(to_string(g)) +
                      "' is not injective and cannot be applied to a revealed inner product");
  }
  Prediction out;
  out.raw = t;
  out.value = apply_activation(g, fixedpoint::decode(t, 2 * precision));
  return out;
}

// Enc_S(theta_0) + sum_j x_j * Enc_S(theta_j) + Enc_S(mu).
Ciphertext masked_published_product(const PublishedModel& published, const FeatureVector& x,
                                    const BigInt& mask, RandomSource& rng) {
  require_dimension(published.dimension(), x.dimension(), "published model");
  const auto& key = published.server_key;
  const auto& xs = x.values();
  Ciphertext acc = published.weights[0];
  for (std::size_t j = 1; j < xs.size(); ++j) {
    acc = key.add(acc, key.scale(xs[j], published.weights[j]));
  }
  acc = key.add(acc, key.encrypt_residue(key.to_residue(mask), rng));
  return acc;
}

}  // namespace

FeatureVector FeatureVector::from_features(std::vector<BigInt> features) {
  FeatureVector v;
  v.x_.reserve(features.size() + 1);
  v.x_.push_back(1);
  for (auto& f : features) v.x_.push_back(std::move(f));
  return v;
}

FeatureVector FeatureVector::encode(std::span<const double> features, std::size_t precision) {
  std::vector<BigInt> z;
  z.reserve(features.size());
  for (double f : features) z.push_back(fixedpoint::encode(f, precision));
  return from_features(std::move(z));
}

BigInt FeatureVector::max_abs_feature() const {
  BigInt m = 0;
  for (std::size_t j = 1; j < x_.size(); ++j) {
    BigInt a = abs_value(x_[j]);
    if (a > m) m = a;
  }
  return m;
}

LinearModel::LinearModel(std::vector<BigInt> theta, std::size_t precision,
                         std::optional<std::size_t> ell)
    : theta_(std::move(theta)), precision_(precision) {
  if (theta_.empty()) throw ConfigError("model needs at least a bias weight");
  BigInt need = weight_bound(theta_, precision_);
  std::size_t need_bits = bit_length(need);
  if (ell) {
    if (*ell < need_bits) {
      throw ConfigError("declared ell = " + std::to_string(*ell) + " is below the " +
                        std::to_string(need_bits) + " bits the weights require");
    }
    ell_ = *ell;
  } else {
    ell_ = std::max(default_ell(precision_, dimension()), need_bits);
  }
}

LinearModel LinearModel::from_real(std::span<const double> weights, std::size_t precision,
                                   std::optional<std::size_t> ell) {
  if (weights.empty()) throw ConfigError("model needs at least a bias weight");
  std::vector<BigInt> theta;
  theta.reserve(weights.size());
  theta.push_back(fixedpoint::encode(weights[0], 2 * precision));
  for (std::size_t j = 1; j < weights.size(); ++j) {
    theta.push_back(fixedpoint::encode(weights[j], precision));
  }
  return LinearModel(std::move(theta), precision, ell);
}

std::size_t LinearModel::default_ell(std::size_t precision, std::size_t dimension) {
  return 2 * precision + ceil_log2(dimension + 1);
}

BigInt LinearModel::weight_bound(std::span<const BigInt> theta, std::size_t precision) {
  if (theta.empty()) return 0;
  BigInt rest = 0;
  for (std::size_t j = 1; j < theta.size(); ++j) rest += abs_value(theta[j]);
  return abs_value(theta[0]) + rest * pow2(precision);
}

BigInt LinearModel::bound() const { return masking::bound_for_bits(ell_); }

std::size_t effective_ell(std::size_t model_ell, std::size_t precision, const FeatureVector& x) {
  BigInt m = x.max_abs_feature();
  BigInt unit = pow2(precision);
  if (m <= unit) return model_ell;
  BigInt factor;
  mpz_cdiv_q(factor.get_mpz_t(), m.get_mpz_t(), unit.get_mpz_t());
  return model_ell + bit_length(factor - 1);
}

Ciphertext encrypted_inner_product(const paillier::PublicKey& key, std::span<const BigInt> theta,
                                   std::span<const Ciphertext> features, RandomSource& rng) {
  if (theta.size() != features.size() + 1) {
    throw DimensionMismatch("weight vector has " + std::to_string(theta.size()) +
                            " entries for " + std::to_string(features.size()) + " features");
  }
  Ciphertext acc = key.encrypt(theta[0], rng);
  for (std::size_t j = 0; j < features.size(); ++j) {
    acc = key.add(acc, key.scale(theta[j + 1], features[j]));
  }
  return acc;
}

EncryptedFeatures regr_core_request(const paillier::PublicKey& client_key, const FeatureVector& x,
                                    RandomSource& rng) {
  EncryptedFeatures req{client_key, {}, 0};
  const auto& xs = x.values();
  req.features.reserve(x.dimension());
  for (std::size_t j = 1; j < xs.size(); ++j) req.features.push_back(client_key.encrypt(xs[j], rng));
  return req;
}

Ciphertext regr_core_respond(const LinearModel& model, const EncryptedFeatures& request,
                             RandomSource& rng) {
  require_dimension(model.dimension(), request.features.size(), "regression request");
  return encrypted_inner_product(request.client_key, model.theta(), request.features, rng);
}

Prediction regr_core_finish(const paillier::SecretKey& client_key, const Ciphertext& t,
                            Activation g, std::size_t precision) {
  return finish_injective(client_key.decrypt(t), g, precision);
}

PublishedModel publish_model(const LinearModel& model, const paillier::PublicKey& server_key,
                             std::size_t kappa, RandomSource& rng) {
  PublishedModel pub{server_key, {}, model.precision(), model.ell(), kappa};
  pub.weights.reserve(model.theta().size());
  for (const auto& w : model.theta()) pub.weights.push_back(server_key.encrypt(w, rng));
  return pub;
}

Prediction DualSession::finish(const BigInt& t_star, Activation g) {
  if (consumed_) throw Error("dual session already finished; masks are single use");
  consumed_ = true;
  BigInt half_up = (modulus_ + 1) / 2;
  BigInt t = mod_floor(t_star - mask_, modulus_);
  if (t >= half_up) t -= modulus_;
  return finish_injective(t, g, precision_);
}

std::pair<Ciphertext, DualSession> regr_dual_request(const PublishedModel& published,
                                                     const FeatureVector& x, RandomSource& rng) {
  BigInt mask = masking::sample_signed_message(rng, published.server_key.n());
  return regr_dual_request_with_mask(published, x, mask, rng);
}

std::pair<Ciphertext, DualSession> regr_dual_request_with_mask(const PublishedModel& published,
                                                               const FeatureVector& x,
                                                               const BigInt& mask,
                                                               RandomSource& rng) {
  if (!published.server_key.in_message_space(mask)) throw RangeError("mask outside message set");
  Ciphertext c = masked_published_product(published, x, mask, rng);
  return {c, DualSession(mask, published.server_key.n(), published.precision)};
}

BigInt regr_dual_respond(const paillier::SecretKey& server_key, const Ciphertext& masked) {
  return server_key.decrypt(masked);
}

int SvmCoreSession::finish(const paillier::SecretKey& client_key,
                           const comparison::ComparisonResponse& response) {
  if (consumed_) throw Error("svm session already finished; masks are single use");
  consumed_ = true;
  bool delta_c = comparison::bit_owner_finish(client_key, response, ell_);
  return (delta_c != test_bit(mask_, ell_)) ? 1 : -1;
}

std::pair<SvmCoreRequest, SvmCoreSession> svm_core_request(const PublishedModel& published,
                                                           const paillier::PublicKey& client_key,
                                                           const FeatureVector& x,
                                                           RandomSource& rng) {
  std::size_t ell = effective_ell(published.ell, published.precision, x);
  BigInt mask = masking::sample_core_mask(rng, ell, published.kappa);
  return svm_core_request_with_mask(published, client_key, x, mask, rng);
}

std::pair<SvmCoreRequest, SvmCoreSession> svm_core_request_with_mask(
    const PublishedModel& published, const paillier::PublicKey& client_key,
    const FeatureVector& x, const BigInt& mask, RandomSource& rng) {
  std::size_t ell = effective_ell(published.ell, published.precision, x);
  masking::require_core_capacity(published.server_key.n(), ell, published.kappa);
  if (mask < pow2(ell) - 1 || mask >= pow2(ell + published.kappa)) {
    throw RangeError("svm mask outside [2^ell - 1, 2^(ell+kappa))");
  }
  SvmCoreRequest req{masked_published_product(published, x, mask, rng), client_key,
                     comparison::bit_owner_request(client_key, mask % pow2(ell), ell, rng)};
  return {std::move(req), SvmCoreSession(mask, ell)};
}

comparison::ComparisonResponse svm_core_respond(const paillier::SecretKey& server_key,
                                                const SvmCoreRequest& request,
                                                std::size_t model_ell, std::size_t kappa,
                                                RandomSource& rng) {
  std::size_t ell = request.mask_bits.bit_length();
  if (ell < model_ell) {
    throw ProtocolViolation("comparison length " + std::to_string(ell) +
                            " below the model bound of " + std::to_string(model_ell) + " bits");
  }
  masking::require_core_capacity(server_key.public_key().n(), ell, kappa);
  BigInt t_star = server_key.decrypt_residue(request.masked);
  if (t_star > masking::core_masked_max(ell, kappa)) {
    throw ProtocolViolation("masked inner product out of range");
  }
  BigInt eta = t_star % pow2(ell);
  bool delta_s = test_bit(t_star, ell);
  return comparison::evaluator_respond(request.client_key, request.mask_bits, eta, delta_s, rng);
}

Ciphertext svm_heur_respond(const LinearModel& model, const EncryptedFeatures& request,
                            std::size_t kappa, RandomSource& rng) {
  const auto& key = request.client_key;
  std::size_t ell = std::max(model.ell(), request.ell);
  auto interval = masking::heuristic_interval(key.n(), masking::bound_for_bits(ell));
  masking::require_heuristic_capacity(interval, kappa);
  Ciphertext t = regr_core_respond(model, request, rng);
  auto masks = masking::sample_heuristic_masks(rng, interval);
  Ciphertext out = key.add_plain(key.scale(masks.lambda, t), masks.mu);
  if (masks.negative) out = key.negate(out);
  return key.rerandomize(out, rng);
}

int svm_heur_finish(const paillier::SecretKey& client_key, const Ciphertext& t_star) {
  return sign_nonneg(client_key.decrypt(t_star));
}

}  // namespace privml::linear

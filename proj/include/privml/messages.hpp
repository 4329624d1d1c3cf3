#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "privml/comparison.hpp"
#include "privml/linear.hpp"
#include "privml/nnprotocols.hpp"
#include "privml/paillier.hpp"
#include "privml/wire.hpp"

/// Encoding of protocol messages into frames.
namespace privml::messages {

using wire::Frame;
using wire::ProtocolId;
using wire::SessionId;

namespace step {
inline constexpr std::uint8_t request = 1;
inline constexpr std::uint8_t response = 2;
// Network evaluations.
inline constexpr std::uint8_t input = 1;
inline constexpr std::uint8_t layer_challenge = 2;
inline constexpr std::uint8_t layer_reply = 3;
inline constexpr std::uint8_t output = 4;
inline constexpr std::uint8_t generic_layer = 5;
inline constexpr std::uint8_t generic_reply = 6;
inline constexpr std::uint8_t error = 0xff;
}  // namespace step

/// Error kinds carried by error frames.
enum class ErrorKind : std::uint8_t { config = 1, protocol = 2, dimension = 3, decode = 4, other = 5 };

Frame encode_error(const SessionId& session, ErrorKind kind, const std::string& message);
/// Rethrows the error a frame carries as the matching exception type.
[[noreturn]] void raise_error(const Frame& frame);
/// Raises a carried error, or throws ProtocolViolation unless the frame has
/// the expected protocol and step.
void expect(const Frame& frame, ProtocolId protocol, std::uint8_t step);

/// Empty request for describe and publish.
Frame encode_empty(ProtocolId protocol, const SessionId& session, std::uint8_t step);

Frame encode_describe_response(const SessionId& session, const std::string& json);
std::string decode_describe_response(const Frame& frame);

/// Regression core and SVM heuristic request: pk_C, declared ell, Enc_C(x_j).
Frame encode_features(ProtocolId protocol, const SessionId& session,
                      const linear::EncryptedFeatures& request);
linear::EncryptedFeatures decode_features(const Frame& frame);

Frame encode_ciphertext(ProtocolId protocol, const SessionId& session, std::uint8_t step,
                        const paillier::Ciphertext& c, const paillier::PublicKey& key);
paillier::Ciphertext decode_ciphertext(const Frame& frame, const paillier::PublicKey& key);

Frame encode_published(const SessionId& session, const linear::PublishedModel& published);
linear::PublishedModel decode_published(const Frame& frame);

Frame encode_scalar(ProtocolId protocol, const SessionId& session, std::uint8_t step,
                    const BigInt& m, const paillier::PublicKey& key);
BigInt decode_scalar(const Frame& frame, const paillier::PublicKey& key);

/// t* under the server key, pk_C, Enc_C(mu_i).
Frame encode_svm_request(const SessionId& session, const linear::SvmCoreRequest& request,
                         const paillier::PublicKey& server_key);
linear::SvmCoreRequest decode_svm_request(const Frame& frame, const paillier::PublicKey& server_key);

Frame encode_comparison(ProtocolId protocol, const SessionId& session,
                        const comparison::ComparisonResponse& response,
                        const paillier::PublicKey& key);
comparison::ComparisonResponse decode_comparison(const Frame& frame, const paillier::PublicKey& key);

/// Network input: pk_C and Enc_C(x_1..x_d).
Frame encode_network_input(ProtocolId protocol, const SessionId& session,
                           const paillier::PublicKey& client_key,
                           const std::vector<paillier::Ciphertext>& inputs);
std::pair<paillier::PublicKey, std::vector<paillier::Ciphertext>> decode_network_input(
    const Frame& frame);

Frame encode_server_message(ProtocolId protocol, const SessionId& session,
                            const nn::ServerMessage& msg, const paillier::PublicKey& client_key);
nn::ServerMessage decode_server_message(const Frame& frame, const paillier::PublicKey& client_key);

/// `server_key` is needed for core-variant layer replies.
Frame encode_client_message(ProtocolId protocol, const SessionId& session,
                            const nn::ClientMessage& msg, const paillier::PublicKey& client_key,
                            const paillier::PublicKey* server_key);
nn::ClientMessage decode_client_message(const Frame& frame, const paillier::PublicKey& client_key,
                                        const paillier::PublicKey* server_key);

}  // namespace privml::messages

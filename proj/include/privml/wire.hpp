#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privml/bigint.hpp"
#include "privml/paillier.hpp"
#include "privml/random.hpp"

/// Binary framing shared by every protocol.
///
///   frame   = version(1) protocol(1) step(1) session(16) length(u32 BE) payload
///   payload = part*
///   part    = tag(1) length(u32 BE) bytes
///
/// Ciphertexts are 2 ceil(l_M / 8) bytes big-endian, public keys and
/// plaintext scalars ceil(l_M / 8) bytes, bits one byte.
namespace privml::wire {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 1 + 1 + 1 + 16 + 4;
inline constexpr std::size_t kPartOverhead = 1 + 4;
/// Upper bound on a frame payload accepted from a peer.
inline constexpr std::uint32_t kMaxPayload = 256u << 20;

enum class ProtocolId : std::uint8_t {
  regr_core = 1,
  regr_dual = 2,
  svm_core = 3,
  svm_heur = 4,
  ffnn_generic = 5,
  ffnn_encrypted = 6,
  publish = 7,
  describe = 8,
  error = 9,
};

std::string_view to_string(ProtocolId id);
/// Accepts the hyphenated CLI names ("svm-core") as well.
ProtocolId parse_protocol(std::string_view name);
bool known_protocol(std::uint8_t id);

enum class PartTag : std::uint8_t {
  ciphertext = 1,
  public_key = 2,
  scalar = 3,
  bit = 4,
  u32 = 5,
  json = 6,
};

using SessionId = std::array<std::uint8_t, 16>;
SessionId random_session_id(RandomSource& rng);
std::string to_hex(const SessionId& id);

struct Part {
  PartTag tag;
  std::vector<std::uint8_t> bytes;
  bool operator==(const Part&) const = default;
};

struct Frame {
  ProtocolId protocol = ProtocolId::describe;
  std::uint8_t step = 0;
  SessionId session{};
  std::vector<Part> parts;

  std::size_t count(PartTag tag) const;
  bool operator==(const Frame&) const = default;
};

std::vector<std::uint8_t> serialize_ciphertext(const paillier::Ciphertext& c,
                                               const paillier::PublicKey& key);
/// Throws DecodeError on a wrong width or a value >= N^2.
paillier::Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes,
                                            const paillier::PublicKey& key);

std::vector<std::uint8_t> encode_payload(std::span<const Part> parts);
std::vector<Part> decode_payload(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_frame(const Frame& frame);
/// Throws DecodeError on truncation, trailing bytes, a bad version or an
/// unknown protocol id.
Frame decode_frame(std::span<const std::uint8_t> bytes);
/// Reads the payload length from a complete header.
std::uint32_t payload_length(std::span<const std::uint8_t> header);

Part ciphertext_part(const paillier::Ciphertext& c, const paillier::PublicKey& key);
Part key_part(const paillier::PublicKey& key);
/// Residue of a signed message, ceil(l_M / 8) bytes.
Part scalar_part(const BigInt& m, const paillier::PublicKey& key);
Part bit_part(bool b);
Part u32_part(std::uint32_t v);
Part json_part(std::string_view text);

/// Sequential typed access to a frame's parts.
class PartReader {
 public:
  explicit PartReader(const Frame& frame) : parts_(frame.parts) {}

  paillier::Ciphertext ciphertext(const paillier::PublicKey& key);
  std::vector<paillier::Ciphertext> ciphertexts(std::size_t n, const paillier::PublicKey& key);
  paillier::PublicKey public_key();
  /// Signed representative of the scalar.
  BigInt scalar(const paillier::PublicKey& key);
  bool bit();
  std::uint32_t u32();
  std::string json();
  std::size_t remaining() const { return parts_.size() - pos_; }
  void expect_done() const;

 private:
  const Part& next(PartTag tag);

  std::span<const Part> parts_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Transcripts.

enum class Direction { client_to_server, server_to_client };

struct TranscriptEntry {
  Direction direction;
  ProtocolId protocol;
  std::uint8_t step;
  std::size_t bytes;
  std::size_t ciphertexts;
  std::size_t keys;
  std::size_t scalars;
};

class Transcript {
 public:
  void record(Direction d, const Frame& frame, std::size_t bytes);
  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

 private:
  std::vector<TranscriptEntry> entries_;
};

struct TranscriptStats {
  std::size_t bytes_up = 0;
  std::size_t bytes_down = 0;
  std::size_t round_trips = 0;
  std::size_t messages_up = 0;
  std::size_t messages_down = 0;
  std::size_t ciphertexts_up = 0;
  std::size_t ciphertexts_down = 0;
  std::size_t keys_up = 0;
  std::size_t keys_down = 0;
  std::size_t scalars_up = 0;
  std::size_t scalars_down = 0;
};

/// Sums over all entries. A round trip is a client -> server message
/// followed by a server -> client one.
TranscriptStats transcript_stats(const Transcript& t);
TranscriptStats transcript_stats(std::span<const TranscriptEntry> entries);

}  // namespace privml::wire

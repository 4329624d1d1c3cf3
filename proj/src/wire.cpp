#include "privml/wire.hpp"

#include <algorithm>

#include "privml/bytes.hpp"
#include "privml/errors.hpp"

namespace privml::wire {

std::string_view to_string(ProtocolId id) {
  switch (id) {
    case ProtocolId::regr_core: return "regr-core";
    case ProtocolId::regr_dual: return "regr-dual";
    case ProtocolId::svm_core: return "svm-core";
    case ProtocolId::svm_heur: return "svm-heuristic";
    case ProtocolId::ffnn_generic: return "ffnn-generic";
    case ProtocolId::ffnn_encrypted: return "ffnn-encrypted";
    case ProtocolId::publish: return "publish";
    case ProtocolId::describe: return "describe";
    case ProtocolId::error: return "error";
  }
  return "unknown";
}

ProtocolId parse_protocol(std::string_view name) {
  std::string n(name);
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "svm-heur") return ProtocolId::svm_heur;
  for (std::uint8_t i = 1; i <= 9; ++i) {
    auto id = static_cast<ProtocolId>(i);
    if (to_string(id) == n) return id;
  }
  throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

bool known_protocol(std::uint8_t id) { return id >= 1 && id <= 9; }

SessionId random_session_id(RandomSource& rng) {
  SessionId id;
  rng.fill(id);
  return id;
}

std::string to_hex(const SessionId& id) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto b : id) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

std::size_t Frame::count(PartTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(parts.begin(), parts.end(), [&](const Part& p) { return p.tag == tag; }));
}

std::vector<std::uint8_t> serialize_ciphertext(const paillier::Ciphertext& c,
                                               const paillier::PublicKey& key) {
  key.check(c);
  return to_bytes_be(c.value(), key.ciphertext_bytes());
}

paillier::Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes,
                                            const paillier::PublicKey& key) {
  if (bytes.size() != key.ciphertext_bytes()) {
    throw DecodeError("ciphertext is " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(key.ciphertext_bytes()));
  }
  BigInt v = from_bytes_be(bytes);
  if (v >= key.n_squared()) throw DecodeError("ciphertext value not below N^2");
  return paillier::Ciphertext(std::move(v), key.id());
}

std::vector<std::uint8_t> encode_payload(std::span<const Part> parts) {
  ByteWriter w;
  for (const auto& p : parts) {
    w.u8(static_cast<std::uint8_t>(p.tag));
    w.prefixed(p.bytes);
  }
  return w.take();
}

std::vector<Part> decode_payload(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  std::vector<Part> parts;
  while (!r.done()) {
    std::uint8_t tag = r.u8();
    if (tag < 1 || tag > 6) throw DecodeError("unknown part tag " + std::to_string(tag));
    auto bytes = r.prefixed();
    parts.push_back(Part{static_cast<PartTag>(tag), {bytes.begin(), bytes.end()}});
  }
  return parts;
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  auto payload = encode_payload(frame.parts);
  ByteWriter w;
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(frame.protocol));
  w.u8(frame.step);
  w.raw(frame.session);
  w.prefixed(payload);
  return w.take();
}

std::uint32_t payload_length(std::span<const std::uint8_t> header) {
  if (header.size() < kHeaderBytes) throw DecodeError("truncated frame header");
  ByteReader r(header.subspan(kHeaderBytes - 4, 4));
  return r.u32();
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::uint8_t version = r.u8();
  if (version != kVersion) throw DecodeError("unsupported frame version " + std::to_string(version));
  std::uint8_t protocol = r.u8();
  if (!known_protocol(protocol)) throw DecodeError("unknown protocol id " + std::to_string(protocol));
  Frame f;
  f.protocol = static_cast<ProtocolId>(protocol);
  f.step = r.u8();
  auto sid = r.raw(16);
  std::copy(sid.begin(), sid.end(), f.session.begin());
  f.parts = decode_payload(r.prefixed());
  r.expect_done("frame");
  return f;
}

Part ciphertext_part(const paillier::Ciphertext& c, const paillier::PublicKey& key) {
  return Part{PartTag::ciphertext, serialize_ciphertext(c, key)};
}

Part key_part(const paillier::PublicKey& key) {
  return Part{PartTag::public_key, to_bytes_be(key.n(), key.byte_length())};
}

Part scalar_part(const BigInt& m, const paillier::PublicKey& key) {
  return Part{PartTag::scalar, to_bytes_be(key.to_residue(m), key.byte_length())};
}

Part bit_part(bool b) { return Part{PartTag::bit, {static_cast<std::uint8_t>(b ? 1 : 0)}}; }

Part u32_part(std::uint32_t v) {
  ByteWriter w;
  w.u32(v);
  return Part{PartTag::u32, w.take()};
}

Part json_part(std::string_view text) {
  return Part{PartTag::json, {text.begin(), text.end()}};
}

const Part& PartReader::next(PartTag tag) {
  if (pos_ >= parts_.size()) throw DecodeError("message has too few parts");
  const Part& p = parts_[pos_++];
  if (p.tag != tag) {
    throw DecodeError("part " + std::to_string(pos_) + " has tag " +
                      std::to_string(static_cast<int>(p.tag)) + ", expected " +
                      std::to_string(static_cast<int>(tag)));
  }
  return p;
}

paillier::Ciphertext PartReader::ciphertext(const paillier::PublicKey& key) {
  return deserialize_ciphertext(next(PartTag::ciphertext).bytes, key);
}

std::vector<paillier::Ciphertext> PartReader::ciphertexts(std::size_t n,
                                                          const paillier::PublicKey& key) {
  std::vector<paillier::Ciphertext> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ciphertext(key));
  return out;
}

paillier::PublicKey PartReader::public_key() {
  const auto& bytes = next(PartTag::public_key).bytes;
  try {
    return paillier::PublicKey(from_bytes_be(bytes));
  } catch (const ConfigError& e) {
    throw DecodeError(std::string("invalid public key: ") + e.what());
  }
}

BigInt PartReader::scalar(const paillier::PublicKey& key) {
  const auto& bytes = next(PartTag::scalar).bytes;
  if (bytes.size() != key.byte_length()) {
    throw DecodeError("scalar is " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(key.byte_length()));
  }
  BigInt v = from_bytes_be(bytes);
  if (v >= key.n()) throw DecodeError("scalar not below N");
  return key.from_residue(v);
}

bool PartReader::bit() {
  const auto& bytes = next(PartTag::bit).bytes;
  if (bytes.size() != 1 || bytes[0] > 1) throw DecodeError("malformed bit part");
  return bytes[0] == 1;
}

std::uint32_t PartReader::u32() {
  const auto& bytes = next(PartTag::u32).bytes;
  if (bytes.size() != 4) throw DecodeError("malformed u32 part");
  ByteReader r(bytes);
  return r.u32();
}

std::string PartReader::json() {
  const auto& bytes = next(PartTag::json).bytes;
  return std::string(bytes.begin(), bytes.end());
}

void PartReader::expect_done() const {
  if (pos_ != parts_.size()) {
    throw DecodeError("message has " + std::to_string(parts_.size() - pos_) + " unexpected parts");
  }
}

void Transcript::record(Direction d, const Frame& frame, std::size_t bytes) {
  entries_.push_back(TranscriptEntry{d, frame.protocol, frame.step, bytes,
                                     frame.count(PartTag::ciphertext),
                                     frame.count(PartTag::public_key),
                                     frame.count(PartTag::scalar)});
}

TranscriptStats transcript_stats(const Transcript& t) { return transcript_stats(t.entries()); }

TranscriptStats transcript_stats(std::span<const TranscriptEntry> entries) {
  TranscriptStats s;
  bool last_up = false;
  for (const auto& e : entries) {
    if (e.direction == Direction::client_to_server) {
      s.bytes_up += e.bytes;
      ++s.messages_up;
      s.ciphertexts_up += e.ciphertexts;
      s.keys_up += e.keys;
      s.scalars_up += e.scalars;
      last_up = true;
    } else {
      s.bytes_down += e.bytes;
      ++s.messages_down;
      s.ciphertexts_down += e.ciphertexts;
      s.keys_down += e.keys;
      s.scalars_down += e.scalars;
      if (last_up) ++s.round_trips;
      last_up = false;
    }
  }
  return s;
}

}  // namespace privml::wire

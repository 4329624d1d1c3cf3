#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "privml/errors.hpp"
#include "privml/wire.hpp"

/// Frame transports: in-process loopback and TCP.
namespace privml::channel {

class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const wire::Frame& frame) = 0;
  /// Blocks until a frame arrives. Throws ChannelClosed when the peer is gone.
  virtual wire::Frame receive() = 0;
  virtual void close() = 0;
};

class ChannelClosed : public Error {
 public:
  using Error::Error;
};

/// Two connected endpoints sharing in-memory queues. Frames still go
/// through encode/decode so sizes are the real wire sizes.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback_pair();

/// Records every frame with its encoded size. `local` is the direction of
/// frames this endpoint sends.
class RecordingChannel : public Channel {
 public:
  RecordingChannel(Channel& inner, wire::Direction local, wire::Transcript& transcript)
      : inner_(inner), local_(local), transcript_(transcript) {}

  void send(const wire::Frame& frame) override;
  wire::Frame receive() override;
  void close() override { inner_.close(); }

 private:
  Channel& inner_;
  wire::Direction local_;
  wire::Transcript& transcript_;
};

class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {}
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  /// Throws Error when the connection cannot be established.
  static std::unique_ptr<TcpChannel> connect(const std::string& host, std::uint16_t port);

  void send(const wire::Frame& frame) override;
  wire::Frame receive() override;
  void close() override;

 private:
  void read_exact(std::uint8_t* out, std::size_t n);
  int fd_;
};

class TcpListener {
 public:
  /// Port 0 picks an ephemeral port. Throws Error when binding fails.
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  /// Returns nullptr once the listener is closed.
  std::unique_ptr<TcpChannel> accept();
  void close();

 private:
  int fd_;
  std::uint16_t port_;
};

/// Splits "host:port".
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

}  // namespace privml::channel

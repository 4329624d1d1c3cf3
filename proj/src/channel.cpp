#include "privml/channel.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

namespace privml::channel {

namespace {

struct Queue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> items;
  bool closed = false;
};

class LoopbackChannel : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<Queue> out, std::shared_ptr<Queue> in)
      : out_(std::move(out)), in_(std::move(in)) {}
  ~LoopbackChannel() override { close(); }

  void send(const wire::Frame& frame) override {
    auto bytes = wire::encode_frame(frame);
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw ChannelClosed("loopback peer closed");
    out_->items.push_back(std::move(bytes));
    out_->cv.notify_all();
  }

  wire::Frame receive() override {
    std::unique_lock lock(in_->mu);
    in_->cv.wait(lock, [&] { return !in_->items.empty() || in_->closed; });
    if (in_->items.empty()) throw ChannelClosed("loopback peer closed");
    auto bytes = std::move(in_->items.front());
    in_->items.pop_front();
    lock.unlock();
    return wire::decode_frame(bytes);
  }

  void close() override {
    for (auto* q : {out_.get(), in_.get()}) {
      std::lock_guard lock(q->mu);
      q->closed = true;
      q->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Queue> out_;
  std::shared_ptr<Queue> in_;
};

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback_pair() {
  auto a = std::make_shared<Queue>();
  auto b = std::make_shared<Queue>();
  return {std::make_unique<LoopbackChannel>(a, b), std::make_unique<LoopbackChannel>(b, a)};
}

void RecordingChannel::send(const wire::Frame& frame) {
  transcript_.record(local_, frame, wire::encode_frame(frame).size());
  inner_.send(frame);
}

wire::Frame RecordingChannel::receive() {
  wire::Frame f = inner_.receive();
  auto remote = local_ == wire::Direction::client_to_server ? wire::Direction::server_to_client
                                                            : wire::Direction::client_to_server;
  transcript_.record(remote, f, wire::encode_frame(f).size());
  return f;
}

TcpChannel::~TcpChannel() { close(); }

std::unique_ptr<TcpChannel> TcpChannel::connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) throw Error("cannot resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* p = res; p; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(errno_text("cannot connect to " + host + ":" + std::to_string(port)));
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<TcpChannel>(fd);
}

void TcpChannel::send(const wire::Frame& frame) {
  auto bytes = wire::encode_frame(frame);
  std::size_t off = 0;
  while (off < bytes.size()) {
    ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ChannelClosed(errno_text("send failed"));
    }
    off += static_cast<std::size_t>(n);
  }
}

void TcpChannel::read_exact(std::uint8_t* out, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    ssize_t r = ::recv(fd_, out + off, n - off, 0);
    if (r == 0) throw ChannelClosed("connection closed by peer");
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ChannelClosed(errno_text("receive failed"));
    }
    off += static_cast<std::size_t>(r);
  }
}

wire::Frame TcpChannel::receive() {
  std::vector<std::uint8_t> buf(wire::kHeaderBytes);
  read_exact(buf.data(), buf.size());
  std::uint32_t len = wire::payload_length(buf);
  if (len > wire::kMaxPayload) throw DecodeError("frame payload of " + std::to_string(len) + " bytes exceeds limit");
  buf.resize(wire::kHeaderBytes + len);
  read_exact(buf.data() + wire::kHeaderBytes, len);
  return wire::decode_frame(buf);
}

void TcpChannel::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), std::to_string(port).c_str(),
                         &hints, &res);
  if (rc != 0) throw Error("cannot resolve " + host + ": " + ::gai_strerror(rc));
  fd_ = -1;
  for (addrinfo* p = res; p; p = p->ai_next) {
    fd_ = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd_ < 0) continue;
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, p->ai_addr, p->ai_addrlen) == 0 && ::listen(fd_, 64) == 0) break;
    ::close(fd_);
    fd_ = -1;
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw Error(errno_text("cannot listen on " + host + ":" + std::to_string(port)));

  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET) {
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  } else {
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
}

TcpListener::~TcpListener() { close(); }

std::unique_ptr<TcpChannel> TcpListener::accept() {
  for (;;) {
    int listen_fd = fd_;
    if (listen_fd < 0) return nullptr;
    int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd >= 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return std::make_unique<TcpChannel>(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return nullptr;
  }
}

void TcpListener::close() {
  if (fd_ >= 0) {
    int fd = fd_;
    fd_ = -1;
    ::shutdown(fd, SHUT_RDWR);
    ::close(fd);
  }
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
  auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) throw ConfigError("endpoint '" + endpoint + "' lacks a port");
  std::string host = endpoint.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  std::string port_text = endpoint.substr(colon + 1);
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError("invalid port in '" + endpoint + "'");
  }
  if (port > 65535) throw ConfigError("port out of range in '" + endpoint + "'");
  return {host, static_cast<std::uint16_t>(port)};
}

}  // namespace privml::channel

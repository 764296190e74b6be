// Copyright 2026 The qgt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Blocking TCP stream sockets carrying framed messages (POSIX).

#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "qgt/netlab/wire.hpp"

namespace qgt::netlab {

inline ProtocolError transport_error(const std::string& what) {
  return ProtocolError("transport", what + ": " + std::strerror(errno));
}

class Connection {
 public:
  Connection() = default;
  explicit Connection(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  Connection(Connection&& o) noexcept : fd_(std::exchange(o.fd_, -1)), decoder_(std::move(o.decoder_)) {}
  Connection& operator=(Connection&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
      decoder_ = std::move(o.decoder_);
    }
    return *this;
  }
  ~Connection() { close(); }

  int fd() const { return fd_; }
  bool open() const { return fd_ >= 0; }

  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void send(const WireMessage& m) {
    const std::string frame = encode_frame(m);
    std::size_t off = 0;
    while (off < frame.size()) {
      const ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw transport_error("send failed");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// A complete buffered message, without reading the socket.
  std::optional<WireMessage> pop() { return decoder_.next(); }

  /// One read() into the decoder.  False on orderly EOF.
  bool fill() {
    char buf[65536];
    for (;;) {
      const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) throw transport_error("recv failed");
      if (n == 0) return false;
      decoder_.feed(buf, static_cast<std::size_t>(n));
      return true;
    }
  }

  /// Next message, waiting up to `timeout_ms`; nullopt on EOF.
  std::optional<WireMessage> receive(int timeout_ms = 30000) {
    for (;;) {
      if (auto m = pop()) return m;
      pollfd p{fd_, POLLIN, 0};
      const int r = ::poll(&p, 1, timeout_ms);
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) throw transport_error("poll failed");
      if (r == 0) throw ProtocolError("transport", "timed out waiting for a message");
      if (!fill()) return std::nullopt;
    }
  }

 private:
  int fd_ = -1;
  FrameDecoder decoder_;
};

class Listener {
 public:
  /// Port 0 picks an ephemeral port; see port().
  Listener(const std::string& host, int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw transport_error("socket failed");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw ProtocolError("transport", "bad IPv4 address " + host);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) throw transport_error("bind failed");
    if (::listen(fd_, 4) < 0) throw transport_error("listen failed");
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  Listener(Listener&& o) noexcept : fd_(std::exchange(o.fd_, -1)), port_(o.port_) {}
  ~Listener() {
    if (fd_ >= 0) ::close(fd_);
  }

  int port() const { return port_; }

  Connection accept(int timeout_ms = 30000) {
    pollfd p{fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, timeout_ms);
    if (r == 0) throw ProtocolError("transport", "timed out waiting for a node to connect");
    if (r < 0) throw transport_error("poll failed");
    const int c = ::accept(fd_, nullptr, nullptr);
    if (c < 0) throw transport_error("accept failed");
    return Connection(c);
  }

 private:
  int fd_ = -1;
  int port_ = 0;
};

/// Retries until the coordinator is listening or `timeout_ms` passes.
inline Connection connect_to(const std::string& host, int port, int timeout_ms = 10000) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw transport_error("socket failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw ProtocolError("transport", "bad IPv4 address " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) return Connection(fd);
    ::close(fd);
    if (std::chrono::steady_clock::now() > deadline) throw transport_error("connect failed");
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace qgt::netlab

// Copyright 2026 The Flame Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flame/net/udp.hpp"

#include <arpa/inet.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <utility>

#include "flame/errors.hpp"

namespace flame::net {

std::string Endpoint::to_string() const {
  return host + ":" + std::to_string(port);
}

sockaddr_in Endpoint::to_sockaddr() const {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  const std::string h = (host == "localhost" || host.empty()) ? "127.0.0.1" : host;
  if (inet_pton(AF_INET, h.c_str(), &sa.sin_addr) != 1) {
    throw ValidationError("not an IPv4 address: " + host);
  }
  return sa;
}

Endpoint Endpoint::from_sockaddr(const sockaddr_in& sa) {
  char buf[INET_ADDRSTRLEN] = {};
  inet_ntop(AF_INET, &sa.sin_addr, buf, sizeof(buf));
  return Endpoint{buf, ntohs(sa.sin_port)};
}

Endpoint Endpoint::parse(std::string_view text, std::uint16_t default_port) {
  Endpoint ep;
  ep.port = default_port;
  std::string_view port_part;
  const std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    if (!text.empty() && text.find_first_not_of("0123456789") == std::string_view::npos) {
      port_part = text;
    } else if (!text.empty()) {
      ep.host = std::string(text);
    }
  } else {
    if (colon > 0) ep.host = std::string(text.substr(0, colon));
    port_part = text.substr(colon + 1);
  }
  if (!port_part.empty()) {
    unsigned v = 0;
    const auto [ptr, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), v);
    if (ec != std::errc() || ptr != port_part.data() + port_part.size() || v > 65535) {
      throw ValidationError("bad port in endpoint '" + std::string(text) + "'");
    }
    ep.port = static_cast<std::uint16_t>(v);
  }
  ep.to_sockaddr();  // validates host
  return ep;
}

UdpSocket::UdpSocket() {
  fd_ = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

void UdpSocket::bind(const Endpoint& ep) {
  const sockaddr_in sa = ep.to_sockaddr();
  int buf = 4 << 20;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof(buf));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
    throw TransportError("cannot bind " + ep.to_string() + ": " + std::strerror(errno));
  }
}

Endpoint UdpSocket::local_endpoint() const {
  sockaddr_in sa{};
  socklen_t len = sizeof(sa);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len);
  return Endpoint::from_sockaddr(sa);
}

void UdpSocket::send_to(std::span<const std::uint8_t> data, const Endpoint& to) {
  const sockaddr_in sa = to.to_sockaddr();
  const ssize_t n = ::sendto(fd_, data.data(), data.size(), 0,
                             reinterpret_cast<const sockaddr*>(&sa), sizeof(sa));
  if (n < 0 || static_cast<std::size_t>(n) != data.size()) {
    throw TransportError("sendto " + to.to_string() + ": " + std::strerror(errno));
  }
}

std::optional<UdpSocket::Datagram> UdpSocket::receive(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (r < 0) {
    if (errno == EINTR) return std::nullopt;
    throw TransportError(std::string("poll: ") + std::strerror(errno));
  }
  if (r == 0) return std::nullopt;
  Datagram d;
  d.data.resize(65535);
  sockaddr_in sa{};
  socklen_t len = sizeof(sa);
  const ssize_t n = ::recvfrom(fd_, d.data.data(), d.data.size(), MSG_DONTWAIT,
                               reinterpret_cast<sockaddr*>(&sa), &len);
  if (n < 0) {
    // Another worker took it, or an ICMP error surfaced on this socket.
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == ECONNREFUSED || errno == EINTR) {
      return std::nullopt;
    }
    throw TransportError(std::string("recvfrom: ") + std::strerror(errno));
  }
  d.data.resize(static_cast<std::size_t>(n));
  d.from = Endpoint::from_sockaddr(sa);
  return d;
}

}  // namespace flame::net

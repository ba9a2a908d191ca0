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

#ifndef FLAME_NET_UDP_HPP_
#define FLAME_NET_UDP_HPP_

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <netinet/in.h>

namespace flame::net {

// host:port with an IPv4 literal or "localhost".
struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  std::string to_string() const;
  sockaddr_in to_sockaddr() const;
  static Endpoint from_sockaddr(const sockaddr_in& sa);
  // Accepts "host:port", ":port" or "port". Throws ValidationError.
  static Endpoint parse(std::string_view text, std::uint16_t default_port = 0);
  bool operator==(const Endpoint&) const = default;
};

class UdpSocket {
 public:
  UdpSocket();
  ~UdpSocket();
  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  // Throws TransportError when the endpoint cannot be bound.
  void bind(const Endpoint& ep);
  Endpoint local_endpoint() const;
  void send_to(std::span<const std::uint8_t> data, const Endpoint& to);

  struct Datagram {
    std::vector<std::uint8_t> data;
    Endpoint from;
  };
  // Waits at most `timeout`; nullopt on timeout.
  std::optional<Datagram> receive(std::chrono::milliseconds timeout);

  int fd() const { return fd_; }

 private:
  int fd_ = -1;
};

}  // namespace flame::net

#endif  // FLAME_NET_UDP_HPP_

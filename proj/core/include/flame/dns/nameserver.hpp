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

#ifndef FLAME_DNS_NAMESERVER_HPP_
#define FLAME_DNS_NAMESERVER_HPP_

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "flame/dns/zone.hpp"
#include "flame/net/udp.hpp"

namespace flame::dns {

struct NameserverConfig {
  net::Endpoint listen{"127.0.0.1", 8053};
  int threads = 2;
  // Upper bound on the TTL of SOA records in negative answers. Leave unset
  // to use min(SOA TTL, MINIMUM) from the zone as is.
  std::optional<std::uint32_t> negative_ttl_cap;
};

struct NameserverStats {
  std::uint64_t datagrams = 0;   // everything received
  std::uint64_t queries = 0;     // decoded queries answered
  std::uint64_t noerror = 0;
  std::uint64_t nodata = 0;
  std::uint64_t nxdomain = 0;
  std::uint64_t refused = 0;
  std::uint64_t formerr = 0;
  std::uint64_t malformed = 0;   // undecodable datagrams
  std::uint64_t dropped = 0;     // too short to answer at all

  nlohmann::json to_json() const;
};

// Builds the wire response for one datagram, or nothing when the datagram
// cannot be answered (too short, or a response rather than a query).
// Counts into `stats` when given. Thread-safe for a const ZoneSet.
std::optional<std::vector<std::uint8_t>> handle_datagram(
    std::span<const std::uint8_t> datagram, const ZoneSet& zones,
    std::optional<std::uint32_t> negative_ttl_cap = {}, NameserverStats* stats = nullptr);

// UDP authoritative server. Starts on construction and stops on destruction.
class Nameserver {
 public:
  // Throws TransportError when the endpoint cannot be bound.
  Nameserver(ZoneSet zones, NameserverConfig config = {});
  ~Nameserver();
  Nameserver(const Nameserver&) = delete;
  Nameserver& operator=(const Nameserver&) = delete;

  // The bound endpoint (resolves port 0 to the ephemeral port).
  const net::Endpoint& endpoint() const { return endpoint_; }
  // Replaces the served zones atomically; in-flight requests finish on the
  // old set.
  void reload(ZoneSet zones);
  NameserverStats stats() const;
  void stop();

 private:
  void worker();
  std::shared_ptr<const ZoneSet> current() const;

  NameserverConfig config_;
  net::UdpSocket socket_;
  net::Endpoint endpoint_;
  mutable std::mutex zones_mu_;
  std::shared_ptr<const ZoneSet> zones_;
  std::atomic<bool> running_{true};
  std::vector<std::thread> workers_;

  struct Counters {
    std::atomic<std::uint64_t> datagrams{0}, queries{0}, noerror{0}, nodata{0}, nxdomain{0},
        refused{0}, formerr{0}, malformed{0}, dropped{0};
  };
  Counters counters_;
};

}  // namespace flame::dns

#endif  // FLAME_DNS_NAMESERVER_HPP_

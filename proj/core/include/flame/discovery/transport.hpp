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

#ifndef FLAME_DISCOVERY_TRANSPORT_HPP_
#define FLAME_DISCOVERY_TRANSPORT_HPP_

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "flame/dns/message.hpp"
#include "flame/dns/zone.hpp"
#include "flame/net/udp.hpp"

namespace flame::discovery {

// One DNS exchange with a server. Implementations are thread-safe.
class Transport {
 public:
  virtual ~Transport() = default;
  // Sends `query` and returns the matching response. `latency_s` receives
  // the time the exchange took (or the timeout). Throws TransportError on
  // timeout or an unusable reply.
  virtual dns::DnsMessage exchange(const dns::DnsMessage& query, const net::Endpoint& server,
                                   std::chrono::milliseconds timeout, double& latency_s) = 0;
};

class UdpTransport final : public Transport {
 public:
  dns::DnsMessage exchange(const dns::DnsMessage& query, const net::Endpoint& server,
                           std::chrono::milliseconds timeout, double& latency_s) override;
};

// In-process transport: each endpoint maps to a ZoneSet and queries go
// through the wire codec and the nameserver's request handler. Latency is
// injected; by default it is only reported, with `sleep` it is also waited.
class SimulatedTransport final : public Transport {
 public:
  using LatencyFn = std::function<double(const net::Endpoint&, const std::string& name)>;
  // Returns true when the query should be lost (reported as a timeout).
  using DropFn = std::function<bool(const net::Endpoint&, const std::string& name)>;

  void add_server(const net::Endpoint& ep, std::shared_ptr<const dns::ZoneSet> zones);
  void set_latency(LatencyFn fn) { latency_ = std::move(fn); }
  void set_drop(DropFn fn) { drop_ = std::move(fn); }
  void set_sleep(bool sleep) { sleep_ = sleep; }

  // Wire queries delivered to (or lost on the way to) `ep` so far.
  std::uint64_t queries_to(const net::Endpoint& ep) const;
  std::uint64_t total_queries() const { return total_; }

  dns::DnsMessage exchange(const dns::DnsMessage& query, const net::Endpoint& server,
                           std::chrono::milliseconds timeout, double& latency_s) override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const dns::ZoneSet>> servers_;
  std::map<std::string, std::uint64_t> per_server_;
  std::atomic<std::uint64_t> total_{0};
  LatencyFn latency_ = [](const net::Endpoint&, const std::string&) { return 0.005; };
  DropFn drop_;
  bool sleep_ = false;
};

}  // namespace flame::discovery

#endif  // FLAME_DISCOVERY_TRANSPORT_HPP_

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

#include "flame/discovery/transport.hpp"

#include <thread>

#include "flame/dns/nameserver.hpp"
#include "flame/errors.hpp"

namespace flame::discovery {

dns::DnsMessage UdpTransport::exchange(const dns::DnsMessage& query, const net::Endpoint& server,
                                       std::chrono::milliseconds timeout, double& latency_s) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto deadline = start + timeout;
  net::UdpSocket sock;
  sock.send_to(dns::encode_message(query), server);
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) break;
    const auto d = sock.receive(left);
    if (!d) continue;
    if (!(d->from == server)) continue;
    dns::DnsMessage r;
    try {
      r = dns::decode_message(d->data);
    } catch (const ParseError&) {
      continue;  // garbage is not an answer; keep waiting
    }
    if (!r.qr || r.id != query.id || r.questions != query.questions) continue;
    latency_s = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
  }
  latency_s = std::chrono::duration<double>(timeout).count();
  throw TransportError("timeout querying " + server.to_string());
}

void SimulatedTransport::add_server(const net::Endpoint& ep,
                                    std::shared_ptr<const dns::ZoneSet> zones) {
  std::lock_guard lock(mu_);
  servers_[ep.to_string()] = std::move(zones);
}

std::uint64_t SimulatedTransport::queries_to(const net::Endpoint& ep) const {
  std::lock_guard lock(mu_);
  const auto it = per_server_.find(ep.to_string());
  return it == per_server_.end() ? 0 : it->second;
}

dns::DnsMessage SimulatedTransport::exchange(const dns::DnsMessage& query,
                                             const net::Endpoint& server,
                                             std::chrono::milliseconds timeout,
                                             double& latency_s) {
  const std::string key = server.to_string();
  const std::string name = query.questions.empty() ? "" : query.questions[0].name;
  std::shared_ptr<const dns::ZoneSet> zones;
  {
    std::lock_guard lock(mu_);
    ++per_server_[key];
    const auto it = servers_.find(key);
    if (it != servers_.end()) zones = it->second;
  }
  ++total_;
  const double timeout_s = std::chrono::duration<double>(timeout).count();
  if (!zones || (drop_ && drop_(server, name))) {
    latency_s = timeout_s;
    if (sleep_) std::this_thread::sleep_for(timeout);
    throw TransportError("timeout querying " + key);
  }
  const double latency = latency_(server, name);
  if (latency >= timeout_s) {
    latency_s = timeout_s;
    if (sleep_) std::this_thread::sleep_for(timeout);
    throw TransportError("timeout querying " + key);
  }
  latency_s = latency;
  if (sleep_) std::this_thread::sleep_for(std::chrono::duration<double>(latency));
  const auto wire = dns::handle_datagram(dns::encode_message(query), *zones);
  if (!wire) throw TransportError("no response from " + key);
  return dns::decode_message(*wire);
}

}  // namespace flame::discovery

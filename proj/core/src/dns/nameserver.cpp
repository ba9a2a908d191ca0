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

#include "flame/dns/nameserver.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "flame/errors.hpp"

namespace flame::dns {
namespace {
// No EDNS negotiation; loopback and LAN paths carry this without
// fragmentation trouble, and the stock 512 would truncate busy cells.
constexpr std::size_t kMaxUdpPayload = 4096;
}  // namespace

nlohmann::json NameserverStats::to_json() const {
  return {{"datagrams", datagrams}, {"queries", queries},     {"noerror", noerror},
          {"nodata", nodata},       {"nxdomain", nxdomain},   {"refused", refused},
          {"formerr", formerr},     {"malformed", malformed}, {"dropped", dropped}};
}

std::optional<std::vector<std::uint8_t>> handle_datagram(
    std::span<const std::uint8_t> datagram, const ZoneSet& zones,
    std::optional<std::uint32_t> negative_ttl_cap, NameserverStats* stats) {
  NameserverStats local;
  NameserverStats& s = stats ? *stats : local;
  ++s.datagrams;
  if (datagram.size() < 12 || (datagram[2] & 0x80) != 0) {
    ++s.dropped;
    return std::nullopt;
  }
  DnsMessage response;
  try {
    const DnsMessage query = decode_message(datagram);
    ++s.queries;
    response = answer(query, zones);
  } catch (const ParseError&) {
    ++s.malformed;
    response.id = static_cast<std::uint16_t>((datagram[0] << 8) | datagram[1]);
    response.qr = true;
    response.opcode = (datagram[2] >> 3) & 0x0f;
    response.rcode = Rcode::kFormErr;
  }
  if (negative_ttl_cap) {
    for (ResourceRecord& rr : response.authority) rr.ttl = std::min(rr.ttl, *negative_ttl_cap);
  }
  switch (response.rcode) {
    case Rcode::kNoError:
      ++(response.answers.empty() ? s.nodata : s.noerror);
      break;
    case Rcode::kNxDomain:
      ++s.nxdomain;
      break;
    case Rcode::kRefused:
      ++s.refused;
      break;
    case Rcode::kFormErr:
      ++s.formerr;
      break;
    default:
      break;
  }
  std::vector<std::uint8_t> wire = encode_message(response);
  if (wire.size() > kMaxUdpPayload) {
    response.tc = true;
    response.answers.clear();
    response.authority.clear();
    response.additional.clear();
    wire = encode_message(response);
  }
  return wire;
}

Nameserver::Nameserver(ZoneSet zones, NameserverConfig config)
    : config_(std::move(config)), zones_(std::make_shared<const ZoneSet>(std::move(zones))) {
  socket_.bind(config_.listen);
  endpoint_ = socket_.local_endpoint();
  const int n = std::max(1, config_.threads);
  for (int i = 0; i < n; ++i) workers_.emplace_back([this] { worker(); });
  spdlog::info("nameserver listening on {} with {} worker(s)", endpoint_.to_string(), n);
}

Nameserver::~Nameserver() { stop(); }

void Nameserver::stop() {
  running_ = false;
  for (std::thread& t : workers_) {
    if (t.joinable()) t.join();
  }
  workers_.clear();
}

void Nameserver::reload(ZoneSet zones) {
  auto next = std::make_shared<const ZoneSet>(std::move(zones));
  std::lock_guard lock(zones_mu_);
  zones_ = std::move(next);
}

std::shared_ptr<const ZoneSet> Nameserver::current() const {
  std::lock_guard lock(zones_mu_);
  return zones_;
}

NameserverStats Nameserver::stats() const {
  NameserverStats s;
  s.datagrams = counters_.datagrams;
  s.queries = counters_.queries;
  s.noerror = counters_.noerror;
  s.nodata = counters_.nodata;
  s.nxdomain = counters_.nxdomain;
  s.refused = counters_.refused;
  s.formerr = counters_.formerr;
  s.malformed = counters_.malformed;
  s.dropped = counters_.dropped;
  return s;
}

void Nameserver::worker() {
  using namespace std::chrono_literals;
  while (running_) {
    std::optional<net::UdpSocket::Datagram> d;
    try {
      d = socket_.receive(100ms);
    } catch (const TransportError& e) {
      spdlog::warn("nameserver receive: {}", e.what());
      continue;
    }
    if (!d) continue;
    NameserverStats s;
    const auto zones = current();
    std::optional<std::vector<std::uint8_t>> wire;
    try {
      wire = handle_datagram(d->data, *zones, config_.negative_ttl_cap, &s);
    } catch (const std::exception& e) {
      // e.g. an answer that cannot be encoded; never take the worker down
      spdlog::warn("nameserver: dropping request from {}: {}", d->from.to_string(), e.what());
      ++counters_.dropped;
    }
    counters_.datagrams += s.datagrams;
    counters_.queries += s.queries;
    counters_.noerror += s.noerror;
    counters_.nodata += s.nodata;
    counters_.nxdomain += s.nxdomain;
    counters_.refused += s.refused;
    counters_.formerr += s.formerr;
    counters_.malformed += s.malformed;
    counters_.dropped += s.dropped;
    if (!wire) continue;
    try {
      socket_.send_to(*wire, d->from);
    } catch (const TransportError& e) {
      spdlog::warn("nameserver send: {}", e.what());
    }
  }
}

}  // namespace flame::dns

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

#ifndef FLAME_DISCOVERY_CLIENT_HPP_
#define FLAME_DISCOVERY_CLIENT_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "flame/clock.hpp"
#include "flame/discovery/transport.hpp"
#include "flame/dns/flame_record.hpp"
#include "flame/errors.hpp"
#include "flame/geo/geodomain.hpp"
#include "flame/net/udp.hpp"

namespace flame::discovery {

struct DiscoveryConfig {
  std::vector<net::Endpoint> resolvers{{"127.0.0.1", 8053}};
  std::chrono::milliseconds timeout{2000};
  int retries = 1;
  int max_depth = 4;
  std::uint32_t max_ttl = 86400;  // clamp for positive and negative TTLs
  int max_parallel = 16;          // 1 runs everything on the calling thread
  std::uint16_t default_mns_port = 53;
  // Treat a cached NXDOMAIN as covering every name below it (RFC 8020).
  // Needs servers that answer NODATA, not NXDOMAIN, for empty non-terminals.
  bool nxdomain_cut = true;

  void validate() const;
};

// Outcome of one TXT lookup.
struct TxtResult {
  enum class Status { kRecords, kNoData, kNxDomain };
  Status status = Status::kNxDomain;
  std::vector<dns::FlameRecord> records;  // FLAME records only
  std::uint32_t ttl = 0;                  // as cached
  bool from_cache = false;
  double latency_s = 0;                   // 0 for cache hits
  int wire_queries = 0;                   // datagrams sent, retries included
  std::vector<std::string> warnings;      // e.g. malformed FLAME data
};

// One line of the resolver trace.
struct TraceEntry {
  double t = 0;
  std::string name;
  net::Endpoint endpoint;
  std::string rcode;  // NOERROR/NXDOMAIN/..., "TIMEOUT" or "ERROR"
  double latency_ms = 0;
  bool cache_hit = false;

  nlohmann::json to_json() const;
};

struct MapServerDescriptor {
  std::string url;
  dns::Url parsed;
  std::string source_domain;
  int source_level = 0;
  std::vector<net::Endpoint> delegation_path;
  double discovered_at = 0;

  nlohmann::json to_json() const;
};

struct FilterPolicy {
  std::vector<std::string> suffix_allowlist;  // empty allows every host
  std::function<bool(const MapServerDescriptor&)> predicate;
};

std::vector<MapServerDescriptor> apply_policy(std::vector<MapServerDescriptor> descriptors,
                                              const FilterPolicy& policy);

struct DiscoveryStats {
  int names = 0;         // lookups made, counting delegated ones
  int cache_hits = 0;
  int wire_lookups = 0;  // lookups that needed the network
  int wire_queries = 0;  // datagrams, retries included
  int failures = 0;
  double hit_ratio() const { return names == 0 ? 0 : static_cast<double>(cache_hits) / names; }
};

struct DiscoveryResult {
  std::vector<MapServerDescriptor> descriptors;
  std::vector<std::string> warnings;
  DiscoveryStats stats;
  // Critical-path latency: the slowest chain of dependent lookups.
  double elapsed_s = 0;
};

// Raised when every lookup of a discovery failed transiently.
class DiscoveryError : public TransportError {
 public:
  DiscoveryError(const std::string& what, std::map<std::string, std::string> causes)
      : TransportError(what), causes_(std::move(causes)) {}
  const std::map<std::string, std::string>& causes() const { return causes_; }

 private:
  std::map<std::string, std::string> causes_;
};

class DiscoveryClient {
 public:
  DiscoveryClient(DiscoveryConfig config, std::shared_ptr<Transport> transport,
                  std::shared_ptr<const Clock> clock = std::make_shared<SteadyClock>());

  // Cache first, then one wire lookup (with retries) against `server`.
  // Throws TransportError for timeouts, SERVFAIL, REFUSED and other
  // unusable answers; those are never cached.
  TxtResult resolve_txt(const std::string& name, const net::Endpoint& server);
  TxtResult resolve_txt(const std::string& name) { return resolve_txt(name, config_.resolvers.at(0)); }

  DiscoveryResult discover(const geo::CoarseLocation& loc, const geo::QueryConfig& cfg,
                           const FilterPolicy& policy = {});

  std::uint64_t wire_queries() const { return wire_queries_; }
  std::uint64_t cache_hits() const { return cache_hits_; }
  std::size_t cache_size() const;
  void clear_cache();

  // Trace lines so far; `take_trace` also clears them.
  std::vector<TraceEntry> trace() const;
  std::vector<TraceEntry> take_trace();
  void set_trace_sink(std::function<void(const TraceEntry&)> sink);

  const DiscoveryConfig& config() const { return config_; }
  const Clock& clock() const { return *clock_; }

 private:
  struct CacheEntry {
    TxtResult value;
    double stored_at = 0;
    double expires_at = 0;
  };
  using Key = std::tuple<std::string, std::string, std::uint16_t>;

  struct Walk;
  double follow(Walk& walk, const net::Endpoint& server, const std::vector<std::string>& names,
                const std::vector<net::Endpoint>& path);
  void record_trace(TraceEntry entry);

  DiscoveryConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<const Clock> clock_;
  mutable std::mutex cache_mu_;
  std::map<Key, CacheEntry> cache_;
  mutable std::mutex trace_mu_;
  std::vector<TraceEntry> trace_;
  std::function<void(const TraceEntry&)> sink_;
  std::atomic<std::uint64_t> wire_queries_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
};

}  // namespace flame::discovery

#endif  // FLAME_DISCOVERY_CLIENT_HPP_

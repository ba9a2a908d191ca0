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

#include "flame/discovery/client.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <thread>

#include "flame/dns/name.hpp"

namespace flame::discovery {
namespace {

std::uint16_t random_id() {
  thread_local std::mt19937 rng{std::random_device{}()};
  return static_cast<std::uint16_t>(rng());
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Runs fn(0..n-1) on up to `width` threads.
template <typename Fn>
void parallel_for(std::size_t n, int width, Fn&& fn) {
  if (width <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  const std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(width));
  for (std::size_t t = 0; t < k; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

std::uint32_t negative_ttl_of(const dns::DnsMessage& r) {
  for (const auto& rr : r.authority) {
    if (rr.type == dns::rtype::kSoa) {
      return std::min(rr.ttl, std::get<dns::SoaData>(rr.rdata).minimum);
    }
  }
  return 0;  // no SOA: RFC 2308 says do not cache
}

}  // namespace

void DiscoveryConfig::validate() const {
  if (resolvers.empty()) throw ValidationError("at least one resolver endpoint is required");
  if (timeout.count() <= 0) throw ValidationError("timeout must be positive");
  if (retries < 0) throw ValidationError("retries must be >= 0");
  if (max_depth < 0) throw ValidationError("max_depth must be >= 0");
  if (max_parallel < 1) throw ValidationError("max_parallel must be >= 1");
}

nlohmann::json TraceEntry::to_json() const {
  return {{"t", t},          {"name", name},
          {"endpoint", endpoint.to_string()}, {"rcode", rcode},
          {"latency_ms", latency_ms}, {"cache_hit", cache_hit}};
}

nlohmann::json MapServerDescriptor::to_json() const {
  nlohmann::json path = nlohmann::json::array();
  for (const auto& ep : delegation_path) path.push_back(ep.to_string());
  return {{"url", url},
          {"source_domain", source_domain},
          {"source_level", source_level},
          {"delegation_path", path},
          {"discovered_at", discovered_at}};
}

std::vector<MapServerDescriptor> apply_policy(std::vector<MapServerDescriptor> descriptors,
                                              const FilterPolicy& policy) {
  std::vector<MapServerDescriptor> out;
  for (auto& d : descriptors) {
    if (!policy.suffix_allowlist.empty()) {
      const std::string host = lower(d.parsed.host);
      const bool allowed = std::any_of(
          policy.suffix_allowlist.begin(), policy.suffix_allowlist.end(), [&](std::string s) {
            s = lower(s);
            while (!s.empty() && s.front() == '.') s.erase(0, 1);
            while (!s.empty() && s.back() == '.') s.pop_back();
            return host == s || host.ends_with("." + s);
          });
      if (!allowed) continue;
    }
    if (policy.predicate && !policy.predicate(d)) continue;
    out.push_back(std::move(d));
  }
  return out;
}

DiscoveryClient::DiscoveryClient(DiscoveryConfig config, std::shared_ptr<Transport> transport,
                                 std::shared_ptr<const Clock> clock)
    : config_(std::move(config)), transport_(std::move(transport)), clock_(std::move(clock)) {
  config_.validate();
  if (!transport_) throw ValidationError("transport is required");
  if (!clock_) throw ValidationError("clock is required");
}

std::size_t DiscoveryClient::cache_size() const {
  std::lock_guard lock(cache_mu_);
  return cache_.size();
}

void DiscoveryClient::clear_cache() {
  std::lock_guard lock(cache_mu_);
  cache_.clear();
}

std::vector<TraceEntry> DiscoveryClient::trace() const {
  std::lock_guard lock(trace_mu_);
  return trace_;
}

std::vector<TraceEntry> DiscoveryClient::take_trace() {
  std::lock_guard lock(trace_mu_);
  return std::exchange(trace_, {});
}

void DiscoveryClient::set_trace_sink(std::function<void(const TraceEntry&)> sink) {
  std::lock_guard lock(trace_mu_);
  sink_ = std::move(sink);
}

void DiscoveryClient::record_trace(TraceEntry entry) {
  std::lock_guard lock(trace_mu_);
  if (sink_) sink_(entry);
  trace_.push_back(std::move(entry));
}

TxtResult DiscoveryClient::resolve_txt(const std::string& raw_name, const net::Endpoint& server) {
  const std::string name = dns::normalize_name(raw_name);
  const Key key{server.to_string(), name, dns::rtype::kTxt};
  {
    std::lock_guard lock(cache_mu_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) {
      if (clock_->now() < it->second.expires_at) {
        TxtResult hit = it->second.value;
        hit.from_cache = true;
        hit.latency_s = 0;
        hit.warnings.clear();
        ++cache_hits_;
        record_trace({clock_->now(), name, server,
                      hit.status == TxtResult::Status::kNxDomain ? "NXDOMAIN" : "NOERROR", 0,
                      true});
        return hit;
      }
      cache_.erase(it);
    }
    if (config_.nxdomain_cut) {
      // A live NXDOMAIN for an ancestor on the same server covers this name.
      // Only entries stored before this instant count, so parallel lookups
      // in one walk do not race each other.
      for (auto dot = name.find('.'); dot != std::string::npos; dot = name.find('.', dot + 1)) {
        const auto up = cache_.find(Key{server.to_string(), name.substr(dot + 1), dns::rtype::kTxt});
        if (up == cache_.end() || clock_->now() >= up->second.expires_at ||
            up->second.stored_at >= clock_->now() ||
            up->second.value.status != TxtResult::Status::kNxDomain) {
          continue;
        }
        TxtResult hit = up->second.value;
        hit.from_cache = true;
        hit.latency_s = 0;
        hit.warnings.clear();
        ++cache_hits_;
        record_trace({clock_->now(), name, server, "NXDOMAIN", 0, true});
        return hit;
      }
    }
  }

  dns::DnsMessage response;
  double total_latency = 0;
  std::string last_error;
  bool got = false;
  int attempts = 0;
  for (; attempts <= config_.retries && !got; ++attempts) {
    const dns::DnsMessage query = dns::make_query(name, dns::rtype::kTxt, random_id());
    ++wire_queries_;
    double latency = 0;
    try {
      response = transport_->exchange(query, server, config_.timeout, latency);
      got = true;
      total_latency += latency;
      record_trace({clock_->now(), name, server, std::string(dns::to_string(response.rcode)),
                    latency * 1000, false});
    } catch (const TransportError& e) {
      total_latency += latency;
      last_error = e.what();
      record_trace({clock_->now(), name, server, "TIMEOUT", latency * 1000, false});
    }
  }
  if (!got) {
    throw TransportError(name + " @" + server.to_string() + ": " + last_error);
  }
  if (response.tc) {
    throw TransportError(name + " @" + server.to_string() + ": truncated response");
  }

  TxtResult result;
  result.latency_s = total_latency;
  result.wire_queries = attempts;
  std::uint32_t ttl = 0;
  switch (response.rcode) {
    case dns::Rcode::kNxDomain:
      result.status = TxtResult::Status::kNxDomain;
      ttl = negative_ttl_of(response);
      break;
    case dns::Rcode::kNoError: {
      bool any = false;
      std::uint32_t min_ttl = UINT32_MAX;
      for (const auto& rr : response.answers) {
        if (rr.type != dns::rtype::kTxt || rr.owner != name) continue;
        any = true;
        min_ttl = std::min(min_ttl, rr.ttl);
        try {
          if (auto rec = dns::parse_flame_record(std::get<dns::TxtData>(rr.rdata))) {
            result.records.push_back(std::move(*rec));
          }
        } catch (const ValidationError& e) {
          result.warnings.push_back(name + ": ignoring malformed FLAME record: " + e.what());
        }
      }
      if (any) {
        result.status = TxtResult::Status::kRecords;
        ttl = min_ttl;
      } else {
        result.status = TxtResult::Status::kNoData;
        ttl = negative_ttl_of(response);
      }
      break;
    }
    default:
      throw TransportError(name + " @" + server.to_string() + ": " +
                           std::string(dns::to_string(response.rcode)));
  }
  result.ttl = std::min(ttl, config_.max_ttl);
  if (result.ttl > 0) {
    std::lock_guard lock(cache_mu_);
    CacheEntry& e = cache_[key];
    e.value = result;
    e.value.warnings.clear();
    e.stored_at = clock_->now();
    e.expires_at = e.stored_at + result.ttl;
  }
  return result;
}

struct DiscoveryClient::Walk {
  std::mutex mu;
  std::vector<std::pair<std::string, int>> all_names;  // query set with levels
  std::set<std::pair<std::string, std::string>> visited;
  std::vector<MapServerDescriptor> found;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> causes;
  DiscoveryStats stats;
  net::Endpoint root;
};

double DiscoveryClient::follow(Walk& walk, const net::Endpoint& server,
                               const std::vector<std::string>& names,
                               const std::vector<net::Endpoint>& path) {
  std::vector<double> elapsed(names.size(), 0);
  parallel_for(names.size(), config_.max_parallel, [&](std::size_t i) {
    const std::string& name = names[i];
    {
      std::lock_guard lock(walk.mu);
      if (!walk.visited.emplace(server.to_string(), name).second) return;
      ++walk.stats.names;
    }
    TxtResult r;
    try {
      r = resolve_txt(name, server);
    } catch (const TransportError& e) {
      std::lock_guard lock(walk.mu);
      ++walk.stats.failures;
      ++walk.stats.wire_lookups;
      walk.stats.wire_queries += config_.retries + 1;
      walk.causes[name + " @" + server.to_string()] = e.what();
      walk.warnings.push_back(e.what());
      elapsed[i] = std::chrono::duration<double>(config_.timeout).count() * (config_.retries + 1);
      return;
    } catch (const std::exception& e) {
      std::lock_guard lock(walk.mu);
      ++walk.stats.failures;
      walk.causes[name + " @" + server.to_string()] = e.what();
      walk.warnings.push_back(name + ": " + e.what());
      return;
    }
    int level = 0;
    std::vector<net::Endpoint> delegations;
    {
      std::lock_guard lock(walk.mu);
      if (r.from_cache) {
        ++walk.stats.cache_hits;
      } else {
        ++walk.stats.wire_lookups;
        walk.stats.wire_queries += r.wire_queries;
      }
      for (auto& w : r.warnings) walk.warnings.push_back(std::move(w));
      for (const auto& [n, l] : walk.all_names) {
        if (n == name) level = l;
      }
      for (const dns::FlameRecord& rec : r.records) {
        if (rec.kind == dns::FlameRecord::Kind::kMcname) {
          MapServerDescriptor d;
          d.url = rec.target;
          if (const auto u = dns::parse_url(rec.target)) d.parsed = *u;
          d.source_domain = name;
          d.source_level = level;
          d.delegation_path = path;
          d.discovered_at = clock_->now();
          walk.found.push_back(std::move(d));
          continue;
        }
        std::optional<net::Endpoint> ep;
        if (const auto hp = dns::parse_host_port(rec.target)) {
          try {
            ep = net::Endpoint::parse(
                hp->host + ":" + std::to_string(hp->port ? hp->port : config_.default_mns_port));
          } catch (const ValidationError&) {
          }
        }
        if (!ep) {
          walk.warnings.push_back(name + ": MNS target '" + rec.target +
                                  "' is not an address this client can reach");
        } else if (static_cast<int>(path.size()) >= config_.max_depth) {
          walk.warnings.push_back(name + ": delegation to " + ep->to_string() +
                                  " exceeds max_depth " + std::to_string(config_.max_depth));
        } else if (*ep == walk.root || *ep == server ||
                   std::find(path.begin(), path.end(), *ep) != path.end()) {
          walk.warnings.push_back(name + ": delegation loop via " + ep->to_string());
        } else if (std::find(delegations.begin(), delegations.end(), *ep) == delegations.end()) {
          delegations.push_back(*ep);
        }
      }
    }
    double child = 0;
    for (const net::Endpoint& ep : delegations) {
      std::vector<std::string> sub{name};
      for (const auto& [n, l] : walk.all_names) {
        if (n != name && dns::is_at_or_below(n, name)) sub.push_back(n);
      }
      std::vector<net::Endpoint> next = path;
      next.push_back(ep);
      child = std::max(child, follow(walk, ep, sub, next));
    }
    elapsed[i] = r.latency_s + child;
  });
  return elapsed.empty() ? 0 : *std::max_element(elapsed.begin(), elapsed.end());
}

DiscoveryResult DiscoveryClient::discover(const geo::CoarseLocation& loc,
                                          const geo::QueryConfig& cfg,
                                          const FilterPolicy& policy) {
  loc.validate();
  cfg.validate();
  Walk walk;
  walk.root = config_.resolvers.at(0);
  std::vector<std::string> names;
  for (const geo::GeoDomain& g : geo::query_set(loc, cfg)) {
    names.push_back(g.to_string());
    walk.all_names.emplace_back(names.back(), g.level());
  }
  DiscoveryResult result;
  result.elapsed_s = follow(walk, walk.root, names, {});
  result.stats = walk.stats;
  result.warnings = std::move(walk.warnings);
  if (result.stats.names > 0 && result.stats.failures == result.stats.names) {
    throw DiscoveryError("every discovery lookup failed", std::move(walk.causes));
  }

  auto kept = apply_policy(std::move(walk.found), policy);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.source_level != b.source_level) return a.source_level > b.source_level;
    if (a.url != b.url) return a.url < b.url;
    return a.delegation_path.size() < b.delegation_path.size();
  });
  std::set<std::string> seen;
  for (auto& d : kept) {
    if (seen.insert(d.url).second) result.descriptors.push_back(std::move(d));
  }
  return result;
}

}  // namespace flame::discovery

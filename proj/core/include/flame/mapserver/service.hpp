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

#ifndef FLAME_MAPSERVER_SERVICE_HPP_
#define FLAME_MAPSERVER_SERVICE_HPP_

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "flame/mapserver/map_file.hpp"
#include "flame/mapserver/protocol.hpp"
#include "flame/net/udp.hpp"

namespace flame::mapserver {

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// Transport-independent request handler for one map:
//   GET  /capabilities
//   POST /localize
//   GET  /waypoints
// Errors are JSON bodies {"v":1,"error":{"code":...,"message":...}}.
class MapService {
 public:
  explicit MapService(MapFile map);

  HttpReply handle(std::string_view method, std::string_view path, std::string_view body) const;

  const MapFile& map() const { return map_; }
  std::uint64_t requests() const { return requests_; }
  std::uint64_t localizations() const { return localizations_; }

 private:
  MapFile map_;
  std::string capabilities_body_;
  std::string waypoints_body_;
  mutable std::atomic<std::uint64_t> requests_{0};
  mutable std::atomic<std::uint64_t> localizations_{0};
};

HttpReply error_reply(int status, std::string_view code, std::string_view message);

// HTTP server around a MapService. Listens on construction.
class MapServer {
 public:
  // Throws TransportError when the endpoint cannot be bound. Port 0 picks
  // an ephemeral port.
  MapServer(std::shared_ptr<const MapService> service, const net::Endpoint& listen);
  ~MapServer();
  MapServer(const MapServer&) = delete;
  MapServer& operator=(const MapServer&) = delete;

  const net::Endpoint& endpoint() const { return endpoint_; }
  std::string base_url() const { return "http://" + endpoint_.to_string(); }
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  net::Endpoint endpoint_;
  std::thread thread_;
};

// Client side of the protocol: request(base_url, method, path, body).
class MapTransport {
 public:
  virtual ~MapTransport() = default;
  // Throws TransportError when no HTTP reply arrives. `latency_s` receives
  // the time taken.
  virtual HttpReply request(const std::string& base_url, std::string_view method,
                            std::string_view path, const std::string& body, double& latency_s) = 0;
};

class HttpMapTransport final : public MapTransport {
 public:
  explicit HttpMapTransport(std::chrono::milliseconds timeout = std::chrono::milliseconds(2000))
      : timeout_(timeout) {}
  HttpReply request(const std::string& base_url, std::string_view method, std::string_view path,
                    const std::string& body, double& latency_s) override;

 private:
  std::chrono::milliseconds timeout_;
};

// Routes base URLs to in-process services; latency is reported, not slept.
class InProcessMapTransport final : public MapTransport {
 public:
  using LatencyFn = std::function<double(const std::string& base_url, std::string_view path)>;

  void add(const std::string& base_url, std::shared_ptr<const MapService> service);
  void set_latency(LatencyFn fn) { latency_ = std::move(fn); }
  HttpReply request(const std::string& base_url, std::string_view method, std::string_view path,
                    const std::string& body, double& latency_s) override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const MapService>> services_;
  LatencyFn latency_ = [](const std::string&, std::string_view) { return 0.02; };
};

// Typed calls over a MapTransport. Transport failures and non-protocol
// replies throw TransportError; a localization failure is a normal result.
class RemoteMap {
 public:
  RemoteMap(std::shared_ptr<MapTransport> transport, std::string base_url);

  CapabilitySet capabilities(double* latency_s = nullptr) const;
  LocalizeResult localize(const LocationCues& cues, double* latency_s = nullptr) const;
  WaypointGraph waypoints(double* latency_s = nullptr) const;
  const std::string& base_url() const { return base_url_; }

 private:
  nlohmann::json call(std::string_view method, std::string_view path, const std::string& body,
                      double* latency_s, bool allow_422) const;
  std::shared_ptr<MapTransport> transport_;
  std::string base_url_;
};

}  // namespace flame::mapserver

#endif  // FLAME_MAPSERVER_SERVICE_HPP_

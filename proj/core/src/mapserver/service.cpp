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

#include "flame/mapserver/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "flame/dns/flame_record.hpp"
#include "flame/errors.hpp"

namespace flame::mapserver {

HttpReply error_reply(int status, std::string_view code, std::string_view message) {
  const nlohmann::json j{{"v", kProtocolVersion},
                         {"error", {{"code", code}, {"message", message}}}};
  return {status, j.dump()};
}

MapService::MapService(MapFile map) : map_(std::move(map)) {
  map_.validate();
  capabilities_body_ = capabilities(map_).to_json().dump();
  waypoints_body_ = waypoint_graph(map_).to_json().dump();
}

HttpReply MapService::handle(std::string_view method, std::string_view path,
                             std::string_view body) const {
  ++requests_;
  if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  while (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
  // Accept any mount prefix: /campus/localize is /localize.
  const auto last = path.rfind('/');
  const std::string_view leaf = last == std::string_view::npos ? path : path.substr(last);

  if (leaf == "/capabilities" || leaf == "/waypoints") {
    if (method != "GET") return error_reply(405, "method_not_allowed", "use GET");
    return {200, leaf == "/capabilities" ? capabilities_body_ : waypoints_body_};
  }
  if (leaf == "/localize") {
    if (method != "POST") return error_reply(405, "method_not_allowed", "use POST");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      return error_reply(400, "bad_json", e.what());
    }
    LocationCues cues;
    try {
      cues = LocationCues::from_json(j);
    } catch (const ValidationError& e) {
      return error_reply(400, "bad_request", e.what());
    }
    ++localizations_;
    const LocalizeResult r = localize(cues, map_);
    return {r.ok ? 200 : 422, r.to_json().dump()};
  }
  return error_reply(404, "not_found", "no route for " + std::string(path));
}

struct MapServer::Impl {
  httplib::Server server;
};

MapServer::MapServer(std::shared_ptr<const MapService> service, const net::Endpoint& listen)
    : impl_(std::make_unique<Impl>()) {
  auto handler = [service](const httplib::Request& req, httplib::Response& res) {
    const HttpReply r = service->handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  // SO_REUSEADDR only: the stock options add SO_REUSEPORT, which would let
  // a second server silently share the port.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.Put(".*", handler);
  impl_->server.Delete(".*", handler);
  const std::string host = listen.host == "localhost" ? "127.0.0.1" : listen.host;
  int port = listen.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    port = -1;
  }
  if (port <= 0) throw TransportError("cannot bind map server to " + listen.to_string());
  endpoint_ = {host, static_cast<std::uint16_t>(port)};
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  spdlog::info("map server '{}' listening on {}", service->map().map_id, endpoint_.to_string());
}

MapServer::~MapServer() { stop(); }

void MapServer::stop() {
  if (thread_.joinable()) {
    impl_->server.stop();
    thread_.join();
  }
}

HttpReply HttpMapTransport::request(const std::string& base_url, std::string_view method,
                                    std::string_view path, const std::string& body,
                                    double& latency_s) {
  const auto url = dns::parse_url(base_url);
  if (!url) throw TransportError("bad map server url " + base_url);
  const auto start = std::chrono::steady_clock::now();
  const std::string scheme_host =
      url->scheme + "://" + url->host + ":" + std::to_string(url->effective_port());
  httplib::Client cli(scheme_host);
  const auto secs = timeout_.count() / 1000;
  const auto usecs = (timeout_.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  const std::string full = url->path + std::string(path);
  httplib::Result res = method == "POST" ? cli.Post(full, body, "application/json") : cli.Get(full);
  latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!res) {
    throw TransportError(base_url + std::string(path) + ": " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

void InProcessMapTransport::add(const std::string& base_url,
                                std::shared_ptr<const MapService> service) {
  std::lock_guard lock(mu_);
  services_[base_url] = std::move(service);
}

HttpReply InProcessMapTransport::request(const std::string& base_url, std::string_view method,
                                         std::string_view path, const std::string& body,
                                         double& latency_s) {
  std::shared_ptr<const MapService> svc;
  {
    std::lock_guard lock(mu_);
    const auto it = services_.find(base_url);
    if (it != services_.end()) svc = it->second;
  }
  if (!svc) throw TransportError("connection refused: " + base_url);
  latency_s = latency_(base_url, path);
  return svc->handle(method, path, body);
}

RemoteMap::RemoteMap(std::shared_ptr<MapTransport> transport, std::string base_url)
    : transport_(std::move(transport)), base_url_(std::move(base_url)) {
  while (base_url_.size() > 1 && base_url_.back() == '/') base_url_.pop_back();
}

nlohmann::json RemoteMap::call(std::string_view method, std::string_view path,
                               const std::string& body, double* latency_s, bool allow_422) const {
  double latency = 0;
  const HttpReply r = transport_->request(base_url_, method, path, body, latency);
  if (latency_s) *latency_s = latency;
  if (r.status != 200 && !(allow_422 && r.status == 422)) {
    std::string code = "http_" + std::to_string(r.status);
    try {
      code = nlohmann::json::parse(r.body).at("error").at("code").get<std::string>();
    } catch (const std::exception&) {
    }
    throw TransportError(base_url_ + std::string(path) + ": " + code);
  }
  try {
    return nlohmann::json::parse(r.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(base_url_ + std::string(path) + ": unparseable reply: " + e.what());
  }
}

CapabilitySet RemoteMap::capabilities(double* latency_s) const {
  try {
    return CapabilitySet::from_json(call("GET", "/capabilities", "", latency_s, false));
  } catch (const ValidationError& e) {
    throw TransportError(base_url_ + "/capabilities: " + e.what());
  }
}

LocalizeResult RemoteMap::localize(const LocationCues& cues, double* latency_s) const {
  try {
    return LocalizeResult::from_json(call("POST", "/localize", cues.to_json().dump(), latency_s, true));
  } catch (const ValidationError& e) {
    throw TransportError(base_url_ + "/localize: " + e.what());
  }
}

WaypointGraph RemoteMap::waypoints(double* latency_s) const {
  try {
    return WaypointGraph::from_json(call("GET", "/waypoints", "", latency_s, false));
  } catch (const ValidationError& e) {
    throw TransportError(base_url_ + "/waypoints: " + e.what());
  }
}

}  // namespace flame::mapserver
